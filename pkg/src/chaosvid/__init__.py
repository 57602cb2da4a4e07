"""Real-time chaotic video encryption with multi-worker confusion and diffusion."""

from .chaos import LasmState, MapKind, PlcmState, Prbg
from .engine import EncryptionContext, Frame, FrameCipher, decrypt_frame, encrypt_frame
from .keying import Key, derive_worker_params, generate_key, parse_key

__all__ = [
    "EncryptionContext",
    "Frame",
    "FrameCipher",
    "Key",
    "LasmState",
    "MapKind",
    "PlcmState",
    "Prbg",
    "decrypt_frame",
    "derive_worker_params",
    "encrypt_frame",
    "generate_key",
    "parse_key",
]

__version__ = "0.1.0"
