/** Post-completion adjudication: review disagreements side by side and record
 * consensus overrides. Refused while the session is open (blinding).
 */

import { ApiClient, ApiError } from "./api.js";
import type { ConsensusLabel, DisagreementRow } from "./types.js";

export type AdjudicationPhase = "loading" | "ready" | "refused" | "error";

export class AdjudicationController {
  phase: AdjudicationPhase = "loading";
  rows: DisagreementRow[] = [];
  refusal: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    readonly adjudicatorId: string,
    private readonly onChange: () => void = () => {},
  ) {}

  async load(): Promise<void> {
    this.phase = "loading";
    try {
      this.rows = await this.api.disagreements(this.sessionId);
      this.phase = "ready";
      this.refusal = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.phase = "refused";
        this.refusal = error.detail;
      } else {
        this.phase = "error";
        this.refusal = error instanceof Error ? error.message : String(error);
      }
    }
    this.onChange();
  }

  async override(matchId: string, consensus: ConsensusLabel): Promise<void> {
    await this.api.adjudicate(this.sessionId, matchId, consensus, this.adjudicatorId);
    await this.load();
  }
}
