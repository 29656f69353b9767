package mathutil

func SumSquares(limit int) int {
	total := 0
	for i := 1; i <= limit; i++ {
		total += i * i
	}
	return total
}
