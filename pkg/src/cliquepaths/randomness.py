#
# Copyright (c) cliquepaths authors and others. All rights reserved.
# SPDX-License-Identifier: Apache-2.0
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
#

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def label_key(label):
    """
    Return a stable 32-bit integer key for a stream `label` string or integer.
    Python's builtin hash() is salted per process and cannot be used here.
    """
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "big")


def stream(seed, *labels):
    """
    Return a numpy Generator for the `seed` 64-bit integer and a sequence of
    stream `labels`. The same (seed, labels) always yields the same stream and
    distinct labels yield independent streams.
    """
    seed = int(seed) & SEED_MASK
    entropy = [seed & 0xFFFFFFFF, seed >> 32]
    entropy.extend(label_key(label) for label in labels)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def child_seed(seed, *labels):
    """
    Return a derived 64-bit integer seed for libraries that want a plain int.
    """
    return int(stream(seed, *labels).integers(0, 2**63 - 1))
