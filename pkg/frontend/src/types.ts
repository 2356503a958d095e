// Wire types mirroring the advice service's JSON payloads, field for field.

export interface AdviceEntity {
  entity_id: string;
  score: number;
  source: string;
}

export interface DecisionRow {
  advice_id: string;
  canonical_url: string;
  publisher: string;
  show: boolean;
  entities: AdviceEntity[];
  provenance: string[];
  article_fingerprint: string;
  class_label: string | null;
  confidence: number | null;
  entities_suppressed: boolean;
  decided_at: number;
}

export interface DecisionsPage {
  items: DecisionRow[];
  page: number;
  page_size: number;
  total: number;
}

export interface OverrideInfo {
  key: string;
  action: string;
  entities: string[];
  author: string;
  created_at: number;
}

export interface EntitySummary {
  id: string;
  kind: string;
  name: string;
  tags: string[];
}

export interface DecisionFilters {
  publisher?: string;
  show?: boolean;
  source?: string;
  since?: number;
  page?: number;
  page_size?: number;
}

export interface HealthInfo {
  status: string;
  model_version: string;
  entity_count: number;
}
