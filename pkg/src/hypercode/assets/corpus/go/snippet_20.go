package tree

type Node struct {
	Value       int
	Left, Right *Node
}

func (n *Node) Insert(value int) *Node {
	if n == nil {
		return &Node{Value: value}
	}
	if value < n.Value {
		n.Left = n.Left.Insert(value)
	} else {
		n.Right = n.Right.Insert(value)
	}
	return n
}
