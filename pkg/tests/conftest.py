import os
import stat
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make `helpers` importable


def _write_script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(f"#!{sys.executable}\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return [sys.executable, str(path)]


@pytest.fixture
def identity_inpaint_provider(tmp_path):
    """Copies the input image to the output path."""
    return _write_script(tmp_path, "inpaint_id.py", """
import argparse, shutil
p = argparse.ArgumentParser()
p.add_argument('--image'); p.add_argument('--mask'); p.add_argument('--out')
a = p.parse_args()
shutil.copyfile(a.image, a.out)
""")


@pytest.fixture
def failing_provider(tmp_path):
    return _write_script(tmp_path, "fail.py", """
import sys
sys.stderr.write('provider blew up\\n')
sys.exit(1)
""")


@pytest.fixture
def wrong_dims_provider(tmp_path):
    """Emits a 1x1 image regardless of input."""
    return _write_script(tmp_path, "wrong_dims.py", """
import argparse
from PIL import Image
p = argparse.ArgumentParser()
p.add_argument('--image'); p.add_argument('--mask'); p.add_argument('--out')
a = p.parse_args()
Image.new('RGB', (1, 1)).save(a.out)
""")


@pytest.fixture
def ramp_depth_provider(tmp_path):
    """Writes a left-to-right ramp PFM matching the input image size."""
    return _write_script(tmp_path, "depth_ramp.py", """
import argparse, struct
from PIL import Image
p = argparse.ArgumentParser()
p.add_argument('--image'); p.add_argument('--out')
a = p.parse_args()
w, h = Image.open(a.image).size
with open(a.out, 'wb') as fh:
    fh.write(b'Pf\\n' + f'{w} {h}\\n'.encode() + b'-1.0\\n')
    row = b''.join(struct.pack('<f', x / max(1, w - 1)) for x in range(w))
    fh.write(row * h)
""")


@pytest.fixture
def constant_depth_provider(tmp_path):
    return _write_script(tmp_path, "depth_const.py", """
import argparse, struct
from PIL import Image
p = argparse.ArgumentParser()
p.add_argument('--image'); p.add_argument('--out')
a = p.parse_args()
w, h = Image.open(a.image).size
with open(a.out, 'wb') as fh:
    fh.write(b'Pf\\n' + f'{w} {h}\\n'.encode() + b'-1.0\\n')
    fh.write(struct.pack('<f', 7.5) * (w * h))
""")


@pytest.fixture
def identity_segment_provider(tmp_path):
    """Copies the input mask to the output path."""
    return _write_script(tmp_path, "segment_id.py", """
import argparse, shutil
p = argparse.ArgumentParser()
p.add_argument('--image'); p.add_argument('--mask'); p.add_argument('--out')
a = p.parse_args()
shutil.copyfile(a.mask, a.out)
""")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
