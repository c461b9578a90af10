# partition: zeros:absent
def test_no_zeros():
    assert code283([1, 2, 3]) == [1, 2, 3]


# partition: zeros:present
def test_zeros_move_to_end():
    assert code283([0, 1, 0, 3, 12]) == [1, 3, 12, 0, 0]


# partition: size:empty
def test_empty_array():
    assert code283([]) == []


# partition: size:one
def test_single_value():
    assert code283([7]) == [7]
