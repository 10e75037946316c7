// Payload shapes of the read-only JSON API. The UI renders these numbers
// as-is; nothing is recomputed client-side.

export interface DagNode {
  id: string;
  name: string;
  parents: string[];
  level: number;
}

export interface LevelSummary {
  level: number;
  count: number;
}

export interface DagDescription {
  nodes: DagNode[];
  levels: LevelSummary[];
  roots: string[];
  leaves: string[];
}

export interface WeightedInstance {
  instance_id: string;
  values: Record<string, number>;
  aggregates: Record<string, number>;
  kind: string;
  dropped_mass?: number;
  truth?: string;
}

export interface InstancePage {
  query: string | null;
  total: number;
  matched: number;
  fraction: number;
  limit: number;
  offset: number;
  ids: string[];
}

export interface GroupEntry {
  value: number | null;
  support: Record<string, number>;
  flags: Record<string, unknown>;
}

export interface PairEntry {
  pair: [string, string];
  value: number;
  co_support: number;
}

export interface MetricReport {
  metric: string;
  params: Record<string, unknown>;
  value: number | null;
  support: Record<string, number>;
  flags: Record<string, unknown>;
  groups?: Record<string, GroupEntry>;
  pairs?: PairEntry[];
  notes?: string[];
  signed_difference?: number;
}
