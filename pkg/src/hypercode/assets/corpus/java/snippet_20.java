class PowerTable {
    public long[] powersOfTwo(int count) {
        long[] table = new long[count];
        long value = 1;
        for (int i = 0; i < count; i++) {
            table[i] = value;
            value <<= 1;
        }
        return table;
    }
}
