package retry

import "time"

func WithBackoff(attempts int, base time.Duration, op func() error) error {
	var err error
	for i := 0; i < attempts; i++ {
		if err = op(); err == nil {
			return nil
		}
		time.Sleep(base * time.Duration(1<<i))
	}
	return err
}
