def test_oracle_leading_zeros():
    assert code283([0, 0, 1]) == [1, 0, 0]


def test_oracle_alternating():
    assert code283([4, 0, 5, 0]) == [4, 5, 0, 0]


def test_oracle_all_zeros():
    assert code283([0, 0, 0]) == [0, 0, 0]
