#!/usr/bin/env python3
"""Regenerate the bundled CSV assets and manifest checksums.

Copies the data files from an installed ``robpy`` distribution
(``pip install robpy``) into ../assets and rewrites the sha256 fields of
assets/manifest.json.
"""
import hashlib
import json
import pathlib
import shutil

import robpy.datasets as ds

src = pathlib.Path(ds.__file__).parent
dst = pathlib.Path(__file__).resolve().parent.parent / "assets"
manifest_path = dst / "manifest.json"
manifest = json.loads(manifest_path.read_text())
for entry in manifest["datasets"]:
    shutil.copyfile(src / "data" / entry["file"], dst / entry["file"])
    shutil.copyfile(src / "descr" / f"{entry['name']}.rst", dst / entry["description"])
    entry["sha256"] = hashlib.sha256((dst / entry["file"]).read_bytes()).hexdigest()
manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
