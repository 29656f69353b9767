class Matrix {
    public int[][] multiply(int[][] left, int[][] right) {
        int rows = left.length;
        int cols = right[0].length;
        int inner = right.length;
        int[][] product = new int[rows][cols];
        for (int r = 0; r < rows; r++) {
            for (int c = 0; c < cols; c++) {
                for (int k = 0; k < inner; k++) {
                    product[r][c] += left[r][k] * right[k][c];
                }
            }
        }
        return product;
    }
}
