def test_oracle_zero():
    assert code1(0, 0) == 0


def test_oracle_large():
    assert code1(1000, 2345) == 3345


def test_oracle_both_negative():
    assert code1(-4, -6) == -10
