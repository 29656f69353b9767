class Temperature {
    private double celsius;

    public void setCelsius(double value) {
        celsius = value;
    }

    public double toFahrenheit() {
        return celsius * 9.0 / 5.0 + 32.0;
    }
}
