import java.util.Optional;

class Registry {
    private final java.util.Map<String, String> entries = new java.util.HashMap<>();

    public void register(String name, String value) {
        entries.put(name, value);
    }

    public Optional<String> lookup(String name) {
        return Optional.ofNullable(entries.get(name));
    }
}
