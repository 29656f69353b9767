class Countdown implements Runnable {
    private final int start;

    Countdown(int start) {
        this.start = start;
    }

    @Override
    public void run() {
        for (int i = start; i >= 0; i--) {
            System.out.println(i);
        }
    }
}
