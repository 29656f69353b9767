abstract class Animal {
    protected final String name;

    Animal(String name) {
        this.name = name;
    }

    abstract String sound();

    String describe() {
        return name + " says " + sound();
    }
}
