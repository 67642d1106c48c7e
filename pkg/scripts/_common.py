"""Tiny helper: expose a dataclass config as command-line flags."""

import argparse
import dataclasses


def parse_config(cls, description):
    p = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        kind = type(default)
        if kind is tuple:
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=default,
                           type=lambda s, k=type(default[0]): tuple(k(v) for v in s.split(",")),
                           help=f"comma-separated (default {','.join(map(str, default))})")
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=default,
                           type=kind, help=f"default {default}")
    return cls(**vars(p.parse_args()))
