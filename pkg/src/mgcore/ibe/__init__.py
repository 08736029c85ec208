from .bb1 import (
    IbeCiphertext,
    IbeMasterSecret,
    IbePrivateKey,
    IbePublicParams,
    decrypt_element,
    encrypt_element,
    extract,
    hash_identity_to_scalar,
    random_gt_element,
    setup,
)
from .groups import BilinearGroup, MockGroup, group_by_name, group_from_descriptor

__all__ = [
    "BilinearGroup",
    "MockGroup",
    "group_by_name",
    "group_from_descriptor",
    "IbeCiphertext",
    "IbeMasterSecret",
    "IbePrivateKey",
    "IbePublicParams",
    "setup",
    "extract",
    "encrypt_element",
    "decrypt_element",
    "hash_identity_to_scalar",
    "random_gt_element",
]
