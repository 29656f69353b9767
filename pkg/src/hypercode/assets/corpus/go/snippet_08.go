package worker

func FanIn(inputs ...<-chan int) <-chan int {
	merged := make(chan int)
	done := make(chan struct{})
	for _, input := range inputs {
		go func(ch <-chan int) {
			for value := range ch {
				merged <- value
			}
			done <- struct{}{}
		}(input)
	}
	go func() {
		for range inputs {
			<-done
		}
		close(merged)
	}()
	return merged
}
