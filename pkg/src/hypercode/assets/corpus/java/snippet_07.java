enum Direction {
    NORTH, EAST, SOUTH, WEST;

    Direction opposite() {
        switch (this) {
            case NORTH: return SOUTH;
            case SOUTH: return NORTH;
            case EAST: return WEST;
            default: return EAST;
        }
    }
}
