package parse

import (
	"errors"
	"strconv"
	"strings"
)

func ParseCSVInts(line string) ([]int, error) {
	if line == "" {
		return nil, errors.New("empty line")
	}
	fields := strings.Split(line, ",")
	out := make([]int, 0, len(fields))
	for _, field := range fields {
		value, err := strconv.Atoi(strings.TrimSpace(field))
		if err != nil {
			return nil, err
		}
		out = append(out, value)
	}
	return out, nil
}
