/**
 * Workbench state and its transitions, kept pure. The server is the only
 * source of truth: every transition here records what a response said,
 * none invents tree structure. Mutations always send the held revision;
 * a conflict refreshes the outline and asks the user to retry while the
 * form draft survives untouched.
 */

import type {
  BuildRunResponse,
  FieldErrorItem,
  GoalRef,
  Manifest,
  OutlineRow,
  ProjectSummary,
  RawValue,
} from "./api.js";
import type { Draft, FormModel } from "./forms.js";

export interface WorkbenchState {
  projectId: string | null;
  projectName: string;
  targets: string[];
  revision: number;
  goals: GoalRef[];
  selectedGoal: string | null;
  rows: OutlineRow[];
  selectedAnchor: string | null;
  selectedComponent: string | null;
  formModel: FormModel | null;
  draft: Draft;
  /** interaction id when the form edits an existing interaction */
  editingInteraction: string | null;
  fieldErrors: Record<string, string>;
  manifest: Manifest | null;
  lastRun: BuildRunResponse | null;
  stepsByGoal: Record<string, number>;
  stepsTotal: number;
  notice: string;
  retryPending: boolean;
}

export function initialState(): WorkbenchState {
  return {
    projectId: null,
    projectName: "",
    targets: [],
    revision: 0,
    goals: [],
    selectedGoal: null,
    rows: [],
    selectedAnchor: null,
    selectedComponent: null,
    formModel: null,
    draft: {},
    editingInteraction: null,
    fieldErrors: {},
    manifest: null,
    lastRun: null,
    stepsByGoal: {},
    stepsTotal: 0,
    notice: "",
    retryPending: false,
  };
}

export function withProject(
  state: WorkbenchState,
  project: ProjectSummary,
): WorkbenchState {
  return {
    ...state,
    projectId: project.project_id,
    projectName: project.name,
    targets: project.targets,
    revision: project.revision,
    goals: project.goals,
    selectedGoal: state.selectedGoal ?? project.goals[0]?.goal_id ?? null,
    notice: "",
  };
}

export function withTree(
  state: WorkbenchState,
  goalId: string,
  rows: OutlineRow[],
  revision: number,
): WorkbenchState {
  const anchorStillThere = rows.some(
    (row) => row.step_id === state.selectedAnchor && row.socket !== null,
  );
  return {
    ...state,
    selectedGoal: goalId,
    rows,
    revision,
    selectedAnchor: anchorStillThere ? state.selectedAnchor : "root",
  };
}

export function withMutation(
  state: WorkbenchState,
  revision: number,
): WorkbenchState {
  return {
    ...state,
    revision,
    fieldErrors: {},
    retryPending: false,
    notice: "",
  };
}

export function withForm(
  state: WorkbenchState,
  componentId: string,
  model: FormModel,
  draft: Draft,
  editingInteraction: string | null = null,
): WorkbenchState {
  return {
    ...state,
    selectedComponent: componentId,
    formModel: model,
    draft,
    editingInteraction,
    fieldErrors: {},
  };
}

export function updateDraft(
  state: WorkbenchState,
  name: string,
  value: RawValue,
): WorkbenchState {
  return { ...state, draft: { ...state.draft, [name]: value } };
}

/** 422: render reasons inline next to the named fields, keep the draft. */
export function withFieldErrors(
  state: WorkbenchState,
  items: FieldErrorItem[],
): WorkbenchState {
  const fieldErrors: Record<string, string> = {};
  for (const item of items) fieldErrors[item.field] = item.reason;
  return { ...state, fieldErrors };
}

/**
 * 409: the project moved underneath us. Adopt the fresh outline and
 * revision, flag the retry prompt, and keep every draft value intact.
 */
export function withConflict(
  state: WorkbenchState,
  freshRows: OutlineRow[],
  currentRevision: number,
): WorkbenchState {
  const refreshed = withTree(
    state,
    state.selectedGoal ?? "",
    freshRows,
    currentRevision,
  );
  return {
    ...refreshed,
    retryPending: true,
    notice:
      "The project changed while you were editing; the tree was " +
      "refreshed. Review and submit again.",
  };
}

export function selectAnchor(
  state: WorkbenchState,
  stepId: string,
): WorkbenchState {
  const row = state.rows.find((r) => r.step_id === stepId);
  if (!row || row.socket === null) return state;
  return { ...state, selectedAnchor: stepId };
}

export function withSteps(
  state: WorkbenchState,
  byGoal: Record<string, number>,
  total: number,
): WorkbenchState {
  return { ...state, stepsByGoal: byGoal, stepsTotal: total };
}

export function withManifest(
  state: WorkbenchState,
  manifest: Manifest,
): WorkbenchState {
  return { ...state, manifest };
}

export function withRun(
  state: WorkbenchState,
  run: BuildRunResponse,
): WorkbenchState {
  return { ...state, lastRun: run };
}

export function withNotice(
  state: WorkbenchState,
  notice: string,
): WorkbenchState {
  return { ...state, notice };
}

/** Label for the anchor picker: where the next interaction will land. */
export function anchorDescription(state: WorkbenchState): string {
  const row = state.rows.find((r) => r.step_id === state.selectedAnchor);
  if (!row) return "(no anchor)";
  return row.owner === null ? `${row.label} (root)` : row.label;
}
