"""Traffic class taxonomy: one normal class, fourteen attack classes, and an
Unknown marker used only for predictions and pool routing, never as ground truth.
"""

from __future__ import annotations

import enum


class ClassLabel(str, enum.Enum):
    NORMAL = "Normal"
    BACKDOOR = "Backdoor"
    DDOS_HTTP = "DDoS_HTTP"
    DDOS_ICMP = "DDoS_ICMP"
    DDOS_TCP = "DDoS_TCP"
    DDOS_UDP = "DDoS_UDP"
    FINGERPRINTING = "Fingerprinting"
    MITM = "MITM"
    PASSWORD = "Password"
    PORT_SCANNING = "Port_Scanning"
    RANSOMWARE = "Ransomware"
    SQL_INJECTION = "SQL_Injection"
    UPLOADING = "Uploading"
    VULNERABILITY_SCAN = "Vulnerability_Scan"
    XSS = "XSS"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


# Canonical order: Normal first, then attacks alphabetically. Integer codes
# index into this list everywhere labels are stored columnar.
CLASS_ORDER: list[ClassLabel] = [
    ClassLabel.NORMAL,
    ClassLabel.BACKDOOR,
    ClassLabel.DDOS_HTTP,
    ClassLabel.DDOS_ICMP,
    ClassLabel.DDOS_TCP,
    ClassLabel.DDOS_UDP,
    ClassLabel.FINGERPRINTING,
    ClassLabel.MITM,
    ClassLabel.PASSWORD,
    ClassLabel.PORT_SCANNING,
    ClassLabel.RANSOMWARE,
    ClassLabel.SQL_INJECTION,
    ClassLabel.UPLOADING,
    ClassLabel.VULNERABILITY_SCAN,
    ClassLabel.XSS,
]

ATTACK_CLASSES: list[ClassLabel] = CLASS_ORDER[1:]

UNLABELED = -1

_CODE = {label: i for i, label in enumerate(CLASS_ORDER)}


def code_of(label: ClassLabel) -> int:
    if label is ClassLabel.UNKNOWN:
        raise ValueError("Unknown is not a ground-truth class")
    return _CODE[label]


def label_of(code: int) -> ClassLabel:
    return CLASS_ORDER[code]


def _canon(raw: str) -> str:
    return raw.strip().replace(" ", "_").replace("-", "_").lower()


_ALIASES = {_canon(label.value): label for label in CLASS_ORDER}
# Spellings seen in raw CSV label columns.
_ALIASES.update(
    {
        "normal": ClassLabel.NORMAL,
        "ddos_http": ClassLabel.DDOS_HTTP,
        "ddos_icmp": ClassLabel.DDOS_ICMP,
        "ddos_tcp": ClassLabel.DDOS_TCP,
        "ddos_udp": ClassLabel.DDOS_UDP,
        "port_scanning": ClassLabel.PORT_SCANNING,
        "sql_injection": ClassLabel.SQL_INJECTION,
        "vulnerability_scanner": ClassLabel.VULNERABILITY_SCAN,
        "vulnerability_scan": ClassLabel.VULNERABILITY_SCAN,
        "xss": ClassLabel.XSS,
        "xss_attack": ClassLabel.XSS,
    }
)


def parse_label(raw: str) -> ClassLabel:
    """Map a raw label string onto the taxonomy; raises ValueError if it
    matches no class (Unknown is never parseable as ground truth)."""
    key = _canon(str(raw))
    label = _ALIASES.get(key)
    if label is None or label is ClassLabel.UNKNOWN:
        raise ValueError(f"unrecognized class label: {raw!r}")
    return label
