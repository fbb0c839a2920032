"""String distances used to balance the morphological distance of mined pairs."""


def edit_distance(a: str, b: str) -> int:
    """
    Levenshtein距離（挿入・削除・置換のコストは1）。

    2行のDPテーブルで計算する。
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            )
        previous = current
    return previous[-1]


def lcs_len(a: str, b: str) -> int:
    """最長共通部分列の長さ。"""
    if not a or not b:
        return 0
    if len(a) < len(b):
        a, b = b, a

    previous = [0] * (len(b) + 1)
    for ca in a:
        current = [0] * (len(b) + 1)
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]
