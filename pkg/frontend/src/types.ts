/**
 * Wire types for the corpus service JSON API.
 *
 * Every field mirrors the server response verbatim; the UI never derives
 * numbers of its own from these shapes, it only lays them out.
 */

export interface BatchInfo {
  id: string;
  contributor_ref: string;
  method: string;
  source: string;
  received_at: string;
  status: string;
  message_count: number;
  rejection_reason: string | null;
  reward_amount: string | null;
  reward_currency: string | null;
}

export interface DuplicateNote {
  index: number;
  kind: string;
  score?: number;
}

export interface QualityReport {
  message_count: number;
  language_counts: Record<string, number>;
  exact_duplicates: DuplicateNote[];
  near_duplicates: DuplicateNote[];
  blocklist_fraction: number;
  flagged_fraction: number;
  recommendation: string;
  reasons: string[];
}

export interface MessagePreview {
  id: string;
  body: string;
  language: string;
}

export interface RewardPreview {
  amount: string;
  currency: string;
  below_minimum: boolean;
}

export interface QueueEntry {
  batch: BatchInfo;
  report: QualityReport;
  messages: MessagePreview[];
  reward_previews: Record<string, RewardPreview>;
}

export interface QueueResponse {
  queue: QueueEntry[];
}

export interface DecisionResponse {
  batch: BatchInfo;
}

export interface CorpusMessage {
  id: string;
  body: string;
  language: string;
  method: string;
  source: string;
  profile_id: string | null;
  sent_at: string | null;
  sender_token: string | null;
  receiver_token: string | null;
}

export interface BrowsePage {
  total: number;
  offset: number;
  limit: number;
  messages: CorpusMessage[];
}

export interface BrowseFilters {
  language?: string;
  source?: string;
  method?: string;
  profile_id?: string;
  offset?: number;
  limit?: number;
}

export interface StatsBucket {
  label: string;
  count: number;
  share: number;
}

export interface LanguageSummary {
  messages: number;
  contributors: number;
  mean_messages_per_contributor: number;
}

export interface StatsReport {
  summary: {
    total_messages: number;
    languages: Record<string, LanguageSummary>;
  };
  methods: Record<string, Record<string, number>>;
  sources: Record<string, Record<string, { messages: number; contributors: number }>>;
  contributor_distribution: Record<string, StatsBucket[]>;
  length: Record<string, { messages: number; mean_chars: number; mean_tokens: number }>;
  demographics: Record<
    string,
    Record<string, { weight_basis: string; buckets: StatsBucket[] }>
  >;
}

export interface ReleaseInfo {
  version_id: string;
  created_at: string;
  message_count_en: number;
  message_count_zh: number;
  artifact_checksums: Record<string, string>;
}
