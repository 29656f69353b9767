import java.util.ArrayList;
import java.util.List;

class Tokenizer {
    public List<String> splitWords(String text) {
        List<String> words = new ArrayList<>();
        for (String piece : text.split("\\s+")) {
            if (!piece.isEmpty()) {
                words.add(piece.toLowerCase());
            }
        }
        return words;
    }
}
