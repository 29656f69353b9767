class VowelCounter {
    public int countVowels(String text) {
        int count = 0;
        String lowered = text.toLowerCase();
        for (int i = 0; i < lowered.length(); i++) {
            char c = lowered.charAt(i);
            if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') {
                count++;
            }
        }
        return count;
    }
}
