"""Break a sinh-chaos permutation/XOR image cipher with one or two chosen images.

Quick tour::

    from chaoscrack import MasterKey, make_local_oracle, run_cpa_attack, decrypt_with_equivalent

    oracle = make_local_oracle(MasterKey(0.41337, 0.11121, 0.24494))
    ek = run_cpa_attack(oracle, 256, 256)       # one 3x400 query
    plain = decrypt_with_equivalent(ciphertext, ek)
"""
from .attacks import run_cpa_attack, run_differential_attack, run_kpa_attack
from .cipher import CipherConfig, decrypt, encrypt, permutation_from_sequence
from .eqkey import (
    EquivalentKey, PartialMap, decrypt_with_equivalent, equivalent_from_master, prop1_project,
    prop2_extend,
)
from .keystream import (
    ChaoticKeystream, IntegratorParams, MasterKey, generate_keystream, integrate_trajectory,
    sample_master_key,
)
from .oracle import (
    EncryptionOracle, make_local_oracle, make_transcript_oracle, verify_equivalent_key,
)
from .pgm import load_pgm, random_image, read_pgm, save_pgm, write_pgm

__version__ = "0.1.0"

__all__ = [
    "CipherConfig", "ChaoticKeystream", "EncryptionOracle", "EquivalentKey", "IntegratorParams",
    "MasterKey", "PartialMap", "decrypt", "decrypt_with_equivalent", "encrypt",
    "equivalent_from_master", "generate_keystream", "integrate_trajectory", "load_pgm", "make_local_oracle", "make_transcript_oracle",
    "permutation_from_sequence", "prop1_project", "prop2_extend", "random_image", "read_pgm",
    "run_cpa_attack", "run_differential_attack", "run_kpa_attack", "sample_master_key", "save_pgm",
    "verify_equivalent_key",
    "write_pgm",
]
