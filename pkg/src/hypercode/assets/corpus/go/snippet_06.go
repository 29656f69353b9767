package seq

func Fibonacci(n int) []int {
	out := make([]int, 0, n)
	a, b := 0, 1
	for len(out) < n {
		out = append(out, a)
		a, b = b, a+b
	}
	return out
}
