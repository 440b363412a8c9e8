"""Shared fixtures: tiny hand-built catalogs and datasets."""

import numpy as np
import pytest

from privacy_profiles.corpus import Dataset, Question, QuestionCatalog, UserProfile


def make_catalog(n: int, group: str = "G", prefix: str = "q") -> QuestionCatalog:
    """n binary questions in one group, aliases q001..q00n."""
    questions = [
        Question(
            id=i,
            alias=f"{prefix}{i + 1:03d}",
            text=f"question {i + 1}",
            group=group,
            subset_tags=frozenset(),
            value_kind="binary",
        )
        for i in range(n)
    ]
    return QuestionCatalog(questions)


def make_dataset(rows, group: str = "G", labels=None) -> Dataset:
    """Dataset from a 0/1 matrix; users u01, u02, ..."""
    rows = np.asarray(rows, dtype=np.float64)
    catalog = make_catalog(rows.shape[1], group=group)
    users = [
        UserProfile(
            user_id=f"u{i + 1:02d}",
            answers=rows[i].copy(),
            self_label=None if labels is None else int(labels[i]),
        )
        for i in range(rows.shape[0])
    ]
    return Dataset(catalog, users)


@pytest.fixture
def four_user_dataset() -> Dataset:
    """The worked similarity fixture used across modules.

    Column 0 is set by everyone (idf 0); the other columns by exactly two
    users each (idf ln 2).
    """
    return make_dataset(
        [
            [1, 1, 0, 0, 0],
            [1, 0, 1, 0, 0],
            [1, 0, 1, 1, 1],
            [1, 1, 0, 1, 1],
        ]
    )
