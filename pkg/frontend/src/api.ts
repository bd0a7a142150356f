/**
 * Typed client for the workbench service. Every call returns parsed JSON
 * or throws ApiFailure carrying the server's machine error code, so the
 * UI can branch on codes (revision_conflict, field_errors, ...) instead
 * of status numbers scattered around.
 */

export type RawValue = string | number | boolean | string[];

export interface FieldErrorItem {
  field: string;
  reason: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  fields?: FieldErrorItem[];
  current_revision?: number;
  dependents?: string[];
}

export class ApiFailure extends Error {
  constructor(
    public status: number,
    public error: ApiErrorBody,
  ) {
    super(`${error.code}: ${error.message}`);
  }
}

export interface ComponentSummary {
  component_id: string;
  display_name: string;
  category_path: string[];
}

export interface FieldConstraint {
  pattern?: string;
  min?: number;
  max?: number;
  choices?: string[];
}

export interface FieldSchema {
  name: string;
  kind: "text" | "integer" | "boolean" | "enum" | "list-of-text";
  required: boolean;
  default: RawValue | null;
  constraint: FieldConstraint | null;
}

export interface PageSchema {
  component_id: string;
  display_name: string;
  fields: FieldSchema[];
}

export interface GoalRef {
  goal_id: string;
  name: string;
}

export interface ProjectSummary {
  project_id: string;
  name: string;
  targets: string[];
  revision: number;
  goals: GoalRef[];
}

export interface OutlineRow {
  depth: number;
  step_id: string;
  label: string;
  kind: "container" | "leaf";
  owner: string | null;
  socket: string | null;
}

export interface SectionSpan {
  section: string;
  start_line: number;
  end_line: number;
}

export interface ManifestUnit {
  filename: string;
  target: string;
  section_map: SectionSpan[];
  text: string;
}

export interface Manifest {
  format: number;
  project_id: string;
  project_revision: number;
  target: string;
  entry: string | null;
  units: ManifestUnit[];
}

export interface BuildReport {
  filename: string;
  success: boolean;
  exit_code: number;
  diagnostics: string | null;
}

export interface RunReport {
  stdout: string;
  stderr: string;
  exit_code: number;
  wall_time: number;
  timed_out: boolean;
}

export interface BuildRunResponse {
  target: string;
  builds: BuildReport[];
  run: RunReport | null;
  revision: number;
}

export interface StepsCount {
  goals: { goal_id: string; name: string; steps: number }[];
  total: number;
  revision: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let error: ApiErrorBody;
      try {
        error = ((await response.json()) as { error: ApiErrorBody }).error;
      } catch {
        error = { code: "internal", message: response.statusText };
      }
      throw new ApiFailure(response.status, error);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/api/health");
  }

  listComponents(category = "", q = ""): Promise<ComponentSummary[]> {
    const params = new URLSearchParams();
    if (category) params.set("category", category);
    if (q) params.set("q", q);
    const suffix = params.toString() ? `?${params.toString()}` : "";
    return this.request<{ components: ComponentSummary[] }>(
      "GET",
      `/api/components${suffix}`,
    ).then((doc) => doc.components);
  }

  componentPage(componentId: string): Promise<PageSchema> {
    return this.request("GET", `/api/components/${componentId}/page`);
  }

  listProjects(): Promise<ProjectSummary[]> {
    return this.request<{ projects: ProjectSummary[] }>(
      "GET",
      "/api/projects",
    ).then((doc) => doc.projects);
  }

  createProject(name: string, targets: string[]): Promise<ProjectSummary> {
    return this.request<{ project: ProjectSummary }>("POST", "/api/projects", {
      name,
      targets,
    }).then((doc) => doc.project);
  }

  getProject(projectId: string): Promise<ProjectSummary> {
    return this.request<{ project: ProjectSummary }>(
      "GET",
      `/api/projects/${projectId}`,
    ).then((doc) => doc.project);
  }

  createGoal(
    projectId: string,
    name: string,
    expectedRevision: number,
  ): Promise<{ goal_id: string; revision: number }> {
    return this.request("POST", `/api/projects/${projectId}/goals`, {
      name,
      expected_revision: expectedRevision,
    });
  }

  getTree(
    projectId: string,
    goalId: string,
  ): Promise<{ goal_id: string; rows: OutlineRow[]; revision: number }> {
    return this.request(
      "GET",
      `/api/projects/${projectId}/goals/${goalId}/tree`,
    );
  }

  applyInteraction(
    projectId: string,
    goalId: string,
    anchor: string,
    componentId: string,
    rawBindings: Record<string, RawValue>,
    expectedRevision: number,
  ): Promise<{ interaction_id: string; revision: number }> {
    return this.request(
      "POST",
      `/api/projects/${projectId}/goals/${goalId}/interactions`,
      {
        anchor,
        component_id: componentId,
        raw_bindings: rawBindings,
        expected_revision: expectedRevision,
      },
    );
  }

  getInteraction(
    projectId: string,
    goalId: string,
    interactionId: string,
  ): Promise<{
    interaction_id: string;
    component_id: string;
    anchor: string;
    bindings: Record<string, RawValue>;
    revision: number;
  }> {
    return this.request(
      "GET",
      `/api/projects/${projectId}/goals/${goalId}/interactions/${interactionId}`,
    );
  }

  editInteraction(
    projectId: string,
    goalId: string,
    interactionId: string,
    rawBindings: Record<string, RawValue>,
    expectedRevision: number,
  ): Promise<{ bindings: Record<string, RawValue>; revision: number }> {
    return this.request(
      "PATCH",
      `/api/projects/${projectId}/goals/${goalId}/interactions/${interactionId}`,
      { raw_bindings: rawBindings, expected_revision: expectedRevision },
    );
  }

  deleteInteraction(
    projectId: string,
    goalId: string,
    interactionId: string,
    cascade: boolean,
    expectedRevision: number,
  ): Promise<{ removed: string[]; revision: number }> {
    const params = new URLSearchParams({
      cascade: String(cascade),
      expected_revision: String(expectedRevision),
    });
    return this.request(
      "DELETE",
      `/api/projects/${projectId}/goals/${goalId}/interactions/${interactionId}?${params}`,
    );
  }

  stepsCount(projectId: string): Promise<StepsCount> {
    return this.request("GET", `/api/projects/${projectId}/steps-count`);
  }

  generate(projectId: string, target: string): Promise<Manifest> {
    return this.request<{ manifest: Manifest }>(
      "POST",
      `/api/projects/${projectId}/generate`,
      { target },
    ).then((doc) => doc.manifest);
  }

  buildRun(
    projectId: string,
    target: string,
    stdin: string,
  ): Promise<BuildRunResponse> {
    return this.request("POST", `/api/projects/${projectId}/build-run`, {
      target,
      stdin,
    });
  }

  async exportFile(projectId: string): Promise<string> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/projects/${projectId}/file`,
      { method: "GET" },
    );
    if (!response.ok) {
      throw new ApiFailure(response.status, {
        code: "internal",
        message: response.statusText,
      });
    }
    return await response.text();
  }
}
