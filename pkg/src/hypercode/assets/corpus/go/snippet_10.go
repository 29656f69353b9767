package config

type Level int

const (
	Debug Level = iota
	Info
	Warning
	Error
)

func (l Level) String() string {
	names := [...]string{"debug", "info", "warning", "error"}
	if int(l) < len(names) {
		return names[l]
	}
	return "unknown"
}
