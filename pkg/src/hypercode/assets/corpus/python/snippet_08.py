def word_frequencies(text):
    freq = {}
    for word in text.lower().split():
        cleaned = word.strip(".,;:!?")
        if cleaned:
            freq[cleaned] = freq.get(cleaned, 0) + 1
    return freq
