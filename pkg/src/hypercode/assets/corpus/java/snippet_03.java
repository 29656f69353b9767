class MaxFinder {
    // Returns the largest element, or Integer.MIN_VALUE when empty.
    public int maxOf(int[] values) {
        int best = Integer.MIN_VALUE;
        for (int value : values) {
            if (value > best) {
                best = value;
            }
        }
        return best;
    }
}
