import java.util.HashMap;
import java.util.Map;

class Histogram {
    private final Map<String, Integer> counts = new HashMap<>();

    public void record(String key) {
        counts.merge(key, 1, Integer::sum);
    }

    public int countOf(String key) {
        return counts.getOrDefault(key, 0);
    }
}
