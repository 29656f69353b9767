package words

import "strings"

func Frequencies(text string) map[string]int {
	freq := make(map[string]int)
	for _, word := range strings.Fields(strings.ToLower(text)) {
		freq[strings.Trim(word, ".,!?;:")]++
	}
	delete(freq, "")
	return freq
}
