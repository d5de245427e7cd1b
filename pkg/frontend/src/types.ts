// Payload shapes mirroring ../schemas/api_schema.json. Field names are the
// wire contract; do not rename without versioning the schema.

export interface StatusResponse {
  model_version: number;
  classes: string[];
  pools: { unknown: number; queued: number; labeled: number };
  queue_size: number;
  labels_since_retrain: number;
  uptime_s: number;
}

export interface PoolsResponse {
  counts: { unknown: number; queued: number; labeled: number };
  unknown_ids: string[];
  queued_ids: string[];
  labeled_ids: string[];
  evictions: number;
}

export interface TopClass {
  label: string;
  p: number;
}

export interface AlQuery {
  id: string;
  uncertainty: number;
  top_classes: TopClass[];
  features: number[];
  model_version: number;
}

export interface LabelResult {
  accepted: number;
  accepted_ids: string[];
  rejected: { id: string; reason: string }[];
  abstained: string[];
}

export interface RetrainReport {
  version: number;
  classes: string[];
  labeled_by_provenance: Record<string, number>;
  unknown_remaining: number;
  metrics: Record<string, unknown>;
  at: number;
}

// The assignable taxonomy: every ground-truth class. Unknown is a routing
// marker, never an assignable label; the service rejects it.
export const ASSIGNABLE_CLASSES = [
  "Normal",
  "Backdoor",
  "DDoS_HTTP",
  "DDoS_ICMP",
  "DDoS_TCP",
  "DDoS_UDP",
  "Fingerprinting",
  "MITM",
  "Password",
  "Port_Scanning",
  "Ransomware",
  "SQL_Injection",
  "Uploading",
  "Vulnerability_Scan",
  "XSS",
] as const;

export type AssignableClass = (typeof ASSIGNABLE_CLASSES)[number];

export const ABSTAIN = "abstain" as const;
export type LabelChoice = AssignableClass | typeof ABSTAIN;
