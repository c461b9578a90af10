# partition: signs:both_positive
def test_add_positives():
    assert code1(2, 3) == 5


# partition: signs:mixed
def test_add_mixed():
    assert code1(-2, 3) == 1
