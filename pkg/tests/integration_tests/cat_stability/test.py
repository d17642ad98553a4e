"""Run the cat-stability scan end to end"""
import json
from pathlib import Path

import numpy as np

from subreak import app


def test_only_macroscopic_cats_collapse(tmp_path):
    cwd = Path(__file__).parents[0]
    status = app.run(['cat-stability',
                      '--config', (cwd / 'cat_stability.cfg').as_posix(),
                      '--out', tmp_path.as_posix()])
    assert status == 0
    manifest = json.loads((tmp_path / 'manifest.json').read_text())
    digest = manifest['config_hash'][:12]
    lines = (tmp_path / f'cat_stability_cat_{digest}.csv').read_text() \
        .splitlines()
    assert lines[0] == 'n,dominant_weight,coverage,selected'
    assert [line.rsplit(',', 1)[-1] for line in lines[1:]] == \
        ['false', 'true']
    summary = json.loads(
        (tmp_path / f'cat_stability_{digest}.json').read_text())['summary']
    assert summary['selected_count'] == 1
    assert np.isclose(summary['observation_time'], 1.0)
