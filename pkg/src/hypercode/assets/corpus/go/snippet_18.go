package ring

type Buffer struct {
	data  []int
	start int
	size  int
}

func New(capacity int) *Buffer {
	return &Buffer{data: make([]int, capacity)}
}

func (b *Buffer) Push(value int) {
	index := (b.start + b.size) % len(b.data)
	b.data[index] = value
	if b.size < len(b.data) {
		b.size++
	} else {
		b.start = (b.start + 1) % len(b.data)
	}
}
