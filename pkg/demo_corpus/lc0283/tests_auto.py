def test_0():
    assert code283([0]) == [0]


def test_1():
    assert code283([0, 1]) == [1, 0]


def test_2():
    assert code283([2, 0, 0, 2]) == [2, 2, 0, 0]
