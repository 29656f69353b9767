class Accumulator {
    private int total;

    public void add(int amount) {
        total += amount;
    }

    public int getTotal() {
        return total;
    }
}
