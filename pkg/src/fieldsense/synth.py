"""Synthetic field corpus generation for desk-scale training and evaluation."""

from __future__ import annotations

import numpy as np

from .dataset import DatasetRow
from .extractor import FieldFeatures

_URLS = [
    "https://www.aurorabank.example/login",
    "https://www.aurorabank.example/signup",
    "https://shopmart.example/checkout",
    "https://shopmart.example/account/register",
    "https://connecthub.example/join",
    "https://connecthub.example/login",
    "https://mailbird.example/signin",
    "https://travelnest.example/booking/guest",
    "https://cityportal.example/services/apply",
    "https://www.quickforms.example/contact",
]

# Per-class pools for the five channels. "types" entries repeat to weight
# the draw toward the realistic control type.
DEFAULT_CLASS_PROFILE: dict[str, dict[str, list[str]]] = {
    "email": {
        "labels": [
            "Email", "Email address", "Email or phone", "E-mail address",
            "Your email", "Email or mobile phone number", "Work email",
            "Contact email",
        ],
        "names": ["email", "email_address", "user_email", "reg_email__", "login_email", "contactEmail"],
        "ids": ["email", "ap_email", "email_field", "login-email", "u_email", "inputEmail"],
        "types": ["email", "email", "text"],
    },
    "password": {
        "labels": ["Password", "New password", "Confirm password", "Choose a password", "Account password"],
        "names": ["password", "session_password", "reg_passwd__", "user_password", "loginPassword"],
        "ids": ["password", "pass", "passwd", "login-password", "inputPassword"],
        "types": ["password"],
    },
    "first_name": {
        "labels": ["First name", "Given name", "Your first name", "Forename"],
        "names": ["firstname", "first_name", "fname", "givenName", "first"],
        "ids": ["firstname", "first-name", "fname", "inputFirstName", "given_name"],
        "types": ["text"],
    },
    "last_name": {
        "labels": ["Last name", "Surname", "Family name", "Your last name"],
        "names": ["lastname", "last_name", "lname", "familyName", "surname"],
        "ids": ["lastname", "last-name", "lname", "inputLastName", "family_name"],
        "types": ["text"],
    },
    "phone": {
        "labels": ["Phone", "Phone number", "Mobile number", "Telephone", "Mobile phone"],
        "names": ["phone", "phone_number", "mobile", "tel", "contactPhone", "mobile_number"],
        "ids": ["phone", "phoneNumber", "mobile", "input-tel", "contact_phone"],
        "types": ["tel", "tel", "text"],
    },
    "address": {
        "labels": ["Address", "Street address", "Address line 1", "Home address", "Postal address"],
        "names": ["address", "street_address", "addr1", "address_line1", "homeAddress"],
        "ids": ["address", "street", "addr-line1", "inputAddress", "postal_address"],
        "types": ["text"],
    },
    "username": {
        "labels": ["Username", "User name", "Choose a username", "Login"],
        "names": ["username", "user_name", "login", "user", "accountName"],
        "ids": ["username", "login-username", "user_id_field", "inputUsername", "user"],
        "types": ["text"],
    },
    "state": {
        "labels": ["State", "State or province", "Province", "Region"],
        "names": ["state", "province", "region", "address_state", "stateCode"],
        "ids": ["state", "province", "region-select", "inputState", "addr_state"],
        "types": ["select", "select", "text"],
    },
}


def _pick(rng: np.random.Generator, pool: list[str]) -> str:
    return pool[int(rng.integers(len(pool)))]


def gen_synthetic(
    class_profile: dict[str, dict[str, list[str]]] | None = None,
    n: int = 1000,
    noise: float = 0.1,
    seed: int = 0,
) -> list[DatasetRow]:
    """Sample n labeled fields from per-class template pools.

    A `noise` fraction of rows gets misleading attributes: either the
    name/id pair or the label is swapped for another class's, leaving the
    remaining channels intact. Class priors are uniform unless a pool
    carries a "prior" entry (a one-element list with a float string).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    profile = class_profile if class_profile is not None else DEFAULT_CLASS_PROFILE
    classes = sorted(profile)
    priors = np.array(
        [float(profile[c].get("prior", ["1"])[0]) for c in classes], dtype=np.float64
    )
    priors = priors / priors.sum()
    rng = np.random.default_rng(seed)

    rows = []
    for _ in range(n):
        cls = classes[int(rng.choice(len(classes), p=priors))]
        pools = profile[cls]
        label = _pick(rng, pools["labels"])
        name = _pick(rng, pools["names"])
        field_id = _pick(rng, pools["ids"])
        ctype = _pick(rng, pools["types"])
        url = _pick(rng, _URLS)
        if noise > 0 and rng.random() < noise:
            decoy = classes[int(rng.integers(len(classes)))]
            while decoy == cls and len(classes) > 1:
                decoy = classes[int(rng.integers(len(classes)))]
            if rng.random() < 0.5:
                name = _pick(rng, profile[decoy]["names"])
                field_id = _pick(rng, profile[decoy]["ids"])
            else:
                label = _pick(rng, profile[decoy]["labels"])
        rows.append(
            DatasetRow(
                features=FieldFeatures(
                    label_text=label, name=name, id=field_id, control_type=ctype, page_url=url
                ),
                target=cls,
            )
        )
    return rows
