import type { Report } from "../src/api.js";

/** Small report shaped like real service output, for pure view-model tests. */
export function fixtureReport(): Report {
  return {
    format: "dcrypps-report/1",
    model_name: "AutoPilotUnit",
    model_digest: "abc123",
    config: { alpha: 0.6 },
    requirements: [
      {
        id: "REQ-1",
        attack: "spoof-via-mitm",
        targets: ["cellnet"],
        text:
          "WAN (Cellular) communication between Ground Station and Autopilot " +
          "should be authenticated using public key encryption.",
        effectiveness: 1.0,
        provenance: [
          { assertion: "P-01", rank: 7 },
          { assertion: "P-04", rank: 0 },
        ],
      },
      {
        id: "REQ-2",
        attack: "tfm-open-ports",
        targets: ["TD1"],
        text: "Ops Dashboard must disable unused services.",
        effectiveness: 1.0,
        provenance: [{ assertion: "P-17", rank: 1 }],
      },
    ],
    ledger: [
      {
        assertion: "P-01",
        violated: ["P-01"],
        severity: "Catastrophic",
        importance: 5,
        effective_target: 0.0002,
        initial_risk: 0.4,
        residual_risk: 0.0001,
        resolved: true,
        causes: [
          {
            component: "GS1",
            kind: "cyber-attack",
            attack: "spoof-via-mitm",
            base: 0.3,
            distance: 4,
            adjusted: 0.038,
            mitigated: true,
            effectiveness: 1.0,
          },
        ],
        emissions: [
          {
            component: "GS1",
            attack: "spoof-via-mitm",
            requirement: "REQ-1",
            candidate_rank: 7,
            residual_before: 0.039,
            residual_after: 0.0001,
          },
        ],
      },
      {
        assertion: "P-04",
        violated: ["P-04"],
        severity: "Catastrophic",
        importance: 5,
        effective_target: 0.0002,
        initial_risk: 0.0001,
        residual_risk: 0.0001,
        resolved: true,
        causes: [
          {
            component: "GS1",
            kind: "cyber-attack",
            attack: "spoof-via-mitm",
            base: 0.3,
            distance: 4,
            adjusted: 0.038,
            mitigated: true,
            effectiveness: 1.0,
          },
        ],
        emissions: [],
      },
      {
        assertion: "P-17",
        violated: ["P-17"],
        severity: "Annoyance",
        importance: 1,
        effective_target: 0.05,
        initial_risk: 0.2,
        residual_risk: 0.0001,
        resolved: true,
        causes: [],
        emissions: [
          {
            component: "TD1",
            attack: "tfm-open-ports",
            requirement: "REQ-2",
            candidate_rank: 1,
            residual_before: 0.2,
            residual_after: 0.0001,
          },
        ],
      },
    ],
    unresolved: [],
    certificate: {
      ps: 0.9995,
      required_ps: 0.9,
      confidence: 1.0,
      samples: 100,
      seed: 0,
      per_assertion: [],
    },
  };
}

export const fixtureCanonical = `dcrypps-model v1
name AutoPilotUnit
component GS1 class=GroundStation kind=station importance=2 display-name="Ground Station"
component TD1 class=OpsDashboard kind=server importance=1 display-name="Ops Dashboard"
component W1 class=WebServer kind=server importance=2 display-name="Autopilot"
component cellnet class=CellularNetwork kind=network importance=1 exposure=internet-facing display-name="Cellular Network"
observable telemetry.display-age anchor=TD1 inputs=GS1
edge GS1 communicates-over cellnet
edge TD1 reads-from GS1
edge W1 communicates-over cellnet
`;
