class StringJoiner {
    public String join(String[] parts, String separator) {
        StringBuilder builder = new StringBuilder();
        for (int i = 0; i < parts.length; i++) {
            if (i > 0) {
                builder.append(separator);
            }
            builder.append(parts[i]);
        }
        return builder.toString();
    }
}
