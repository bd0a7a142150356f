/**
 * DOM wiring for the workbench. All program state lives on the server;
 * this layer renders `WorkbenchState` snapshots and turns clicks into
 * API calls. It deliberately contains no steps-tree logic of its own.
 */

import { Api, ApiFailure, type ComponentSummary, type RawValue } from "./api.js";
import {
  buildFormModel,
  collectRaw,
  draftFromBindings,
  initialDraft,
  type FormControl,
} from "./forms.js";
import {
  anchorDescription,
  initialState,
  selectAnchor,
  updateDraft,
  withConflict,
  withFieldErrors,
  withForm,
  withManifest,
  withMutation,
  withNotice,
  withProject,
  withRun,
  withSteps,
  withTree,
  type WorkbenchState,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export class Workbench {
  private state: WorkbenchState = initialState();
  private components: ComponentSummary[] = [];

  constructor(private api: Api) {}

  async start(): Promise<void> {
    byId<HTMLButtonElement>("project-create").onclick = () =>
      this.guard(() => this.createProject());
    byId<HTMLButtonElement>("goal-create").onclick = () =>
      this.guard(() => this.createGoal());
    byId<HTMLInputElement>("browser-search").oninput = () =>
      this.guard(() => this.refreshBrowser());
    byId<HTMLSelectElement>("browser-category").onchange = () =>
      this.guard(() => this.refreshBrowser());
    byId<HTMLButtonElement>("code-generate").onclick = () =>
      this.guard(() => this.generate());
    byId<HTMLButtonElement>("run-start").onclick = () =>
      this.guard(() => this.buildRun());
    await this.populateCategories();
    await this.refreshBrowser();
    await this.openExistingProject();
    this.render();
  }

  /** Route API failures into state instead of letting them escape. */
  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (failure) {
      if (failure instanceof ApiFailure) {
        await this.handleFailure(failure);
      } else {
        this.state = withNotice(this.state, String(failure));
      }
    }
    this.render();
  }

  private async handleFailure(failure: ApiFailure): Promise<void> {
    const error = failure.error;
    if (error.code === "field_errors" && error.fields) {
      this.state = withFieldErrors(this.state, error.fields);
      return;
    }
    if (error.code === "revision_conflict") {
      const fresh = await this.fetchRows();
      this.state = withConflict(
        this.state,
        fresh,
        error.current_revision ?? this.state.revision,
      );
      return;
    }
    if (error.code === "has_dependents") {
      const names = (error.dependents ?? []).join(", ");
      if (
        window.confirm(
          `Other steps are anchored inside (${names}). Delete them too?`,
        )
      ) {
        await this.deletePending(true);
      }
      return;
    }
    this.state = withNotice(this.state, `${error.code}: ${error.message}`);
  }

  // --- project / goals -----------------------------------------------

  private async openExistingProject(): Promise<void> {
    const fromHash = window.location.hash.replace(/^#/, "");
    if (fromHash) {
      this.state = withProject(this.state, await this.api.getProject(fromHash));
      await this.refreshTree();
      await this.refreshSteps();
      return;
    }
    const existing = await this.api.listProjects();
    if (existing.length > 0) {
      this.state = withProject(this.state, existing[0]);
      window.location.hash = existing[0].project_id;
      await this.refreshTree();
      await this.refreshSteps();
    }
  }

  private async createProject(): Promise<void> {
    const name = byId<HTMLInputElement>("project-name").value.trim();
    const targets = Array.from(
      byId<HTMLSelectElement>("project-targets").selectedOptions,
    ).map((option) => option.value);
    if (!name) {
      this.state = withNotice(this.state, "project needs a name");
      return;
    }
    const project = await this.api.createProject(name, targets);
    this.state = withProject(initialState(), project);
    window.location.hash = project.project_id;
  }

  private async createGoal(): Promise<void> {
    const projectId = this.state.projectId;
    if (!projectId) return;
    const name = byId<HTMLInputElement>("goal-name").value.trim();
    if (!name) return;
    const created = await this.api.createGoal(
      projectId,
      name,
      this.state.revision,
    );
    this.state = withMutation(this.state, created.revision);
    this.state = withProject(
      { ...this.state, selectedGoal: created.goal_id },
      await this.api.getProject(projectId),
    );
    this.state.selectedGoal = created.goal_id;
    byId<HTMLInputElement>("goal-name").value = "";
    await this.refreshTree();
    await this.refreshSteps();
  }

  private async selectGoal(goalId: string): Promise<void> {
    this.state = { ...this.state, selectedGoal: goalId };
    await this.refreshTree();
  }

  // --- browser / form --------------------------------------------------

  private async populateCategories(): Promise<void> {
    const components = await this.api.listComponents();
    const paths = new Set<string>();
    for (const component of components) {
      for (let i = 1; i <= component.category_path.length; i++) {
        paths.add(component.category_path.slice(0, i).join("/"));
      }
    }
    const select = byId<HTMLSelectElement>("browser-category");
    select.replaceChildren(new Option("all categories", ""));
    for (const path of [...paths].sort()) {
      select.append(new Option(path, path));
    }
  }

  private async refreshBrowser(): Promise<void> {
    const category = byId<HTMLSelectElement>("browser-category").value;
    const query = byId<HTMLInputElement>("browser-search").value.trim();
    this.components = await this.api.listComponents(category, query);
  }

  private async pickComponent(componentId: string): Promise<void> {
    const page = await this.api.componentPage(componentId);
    const model = buildFormModel(page);
    this.state = withForm(this.state, componentId, model, initialDraft(model));
  }

  private async startEdit(interactionId: string): Promise<void> {
    const { projectId, selectedGoal } = this.state;
    if (!projectId || !selectedGoal) return;
    const detail = await this.api.getInteraction(
      projectId,
      selectedGoal,
      interactionId,
    );
    const page = await this.api.componentPage(detail.component_id);
    const model = buildFormModel(page);
    this.state = withForm(
      this.state,
      detail.component_id,
      model,
      draftFromBindings(model, detail.bindings),
      interactionId,
    );
  }

  private async submitForm(): Promise<void> {
    const { projectId, selectedGoal, formModel, selectedComponent } = this.state;
    if (!projectId || !selectedGoal || !formModel || !selectedComponent) return;
    const raw = collectRaw(formModel, this.state.draft);
    if (this.state.editingInteraction) {
      const edited = await this.api.editInteraction(
        projectId,
        selectedGoal,
        this.state.editingInteraction,
        raw,
        this.state.revision,
      );
      this.state = withMutation(this.state, edited.revision);
    } else {
      const applied = await this.api.applyInteraction(
        projectId,
        selectedGoal,
        this.state.selectedAnchor ?? "root",
        selectedComponent,
        raw,
        this.state.revision,
      );
      this.state = withMutation(this.state, applied.revision);
    }
    await this.refreshTree();
    await this.refreshSteps();
  }

  // --- delete -----------------------------------------------------------

  private pendingDelete: string | null = null;

  private async deleteInteraction(interactionId: string): Promise<void> {
    this.pendingDelete = interactionId;
    await this.deletePending(false);
  }

  private async deletePending(cascade: boolean): Promise<void> {
    const { projectId, selectedGoal } = this.state;
    if (!projectId || !selectedGoal || !this.pendingDelete) return;
    const result = await this.api.deleteInteraction(
      projectId,
      selectedGoal,
      this.pendingDelete,
      cascade,
      this.state.revision,
    );
    this.pendingDelete = null;
    this.state = withMutation(this.state, result.revision);
    await this.refreshTree();
    await this.refreshSteps();
  }

  // --- tree / steps / code / run ----------------------------------------

  private async fetchRows() {
    if (!this.state.projectId || !this.state.selectedGoal) return [];
    const tree = await this.api.getTree(
      this.state.projectId,
      this.state.selectedGoal,
    );
    return tree.rows;
  }

  private async refreshTree(): Promise<void> {
    if (!this.state.projectId || !this.state.selectedGoal) return;
    const tree = await this.api.getTree(
      this.state.projectId,
      this.state.selectedGoal,
    );
    this.state = withTree(this.state, tree.goal_id, tree.rows, tree.revision);
  }

  private async refreshSteps(): Promise<void> {
    if (!this.state.projectId) return;
    const counts = await this.api.stepsCount(this.state.projectId);
    const byGoal: Record<string, number> = {};
    for (const goal of counts.goals) byGoal[goal.goal_id] = goal.steps;
    this.state = withSteps(this.state, byGoal, counts.total);
  }

  private async generate(): Promise<void> {
    if (!this.state.projectId) return;
    const target = byId<HTMLSelectElement>("code-target").value;
    this.state = withManifest(
      this.state,
      await this.api.generate(this.state.projectId, target),
    );
  }

  private async buildRun(): Promise<void> {
    if (!this.state.projectId) return;
    const target = byId<HTMLSelectElement>("run-target").value;
    const stdin = byId<HTMLTextAreaElement>("run-stdin").value;
    this.state = withRun(
      this.state,
      await this.api.buildRun(this.state.projectId, target, stdin),
    );
  }

  // --- rendering -----------------------------------------------------------

  private render(): void {
    this.renderHeader();
    this.renderGoals();
    this.renderBrowser();
    this.renderTree();
    this.renderForm();
    this.renderCode();
    this.renderRun();
    byId("notice").textContent = this.state.notice;
    byId("notice").classList.toggle("notice-retry", this.state.retryPending);
  }

  private renderHeader(): void {
    const label = this.state.projectId
      ? `${this.state.projectName} @ r${this.state.revision}`
      : "no project";
    byId("project-label").textContent = label;
    byId("steps-total").textContent = String(this.state.stepsTotal);
    for (const id of ["code-target", "run-target"]) {
      const select = byId<HTMLSelectElement>(id);
      const current = select.value;
      select.replaceChildren(
        ...this.state.targets.map((target) => new Option(target, target)),
      );
      if (this.state.targets.includes(current)) select.value = current;
    }
  }

  private renderGoals(): void {
    const list = byId("goal-list");
    list.replaceChildren();
    for (const goal of this.state.goals) {
      const steps = this.state.stepsByGoal[goal.goal_id] ?? 0;
      const item = el("li", goal.goal_id === this.state.selectedGoal
        ? "goal selected" : "goal");
      const name = el("span", "goal-name", goal.name);
      const count = el("span", "goal-steps", `${steps} steps`);
      item.append(name, count);
      item.onclick = () => this.guard(() => this.selectGoal(goal.goal_id));
      list.append(item);
    }
  }

  private renderBrowser(): void {
    const list = byId("browser-list");
    list.replaceChildren();
    for (const component of this.components) {
      const item = el(
        "li",
        component.component_id === this.state.selectedComponent
          ? "component selected"
          : "component",
      );
      item.append(
        el("span", "component-name", component.display_name),
        el("span", "component-category", component.category_path.join(" / ")),
      );
      item.onclick = () =>
        this.guard(() => this.pickComponent(component.component_id));
      list.append(item);
    }
  }

  private renderTree(): void {
    const list = byId("tree-rows");
    list.replaceChildren();
    for (const row of this.state.rows) {
      const item = el("li", "step");
      item.style.paddingLeft = `${row.depth * 18}px`;
      if (row.step_id === this.state.selectedAnchor) {
        item.classList.add("anchor");
      }
      const label = el(
        "span",
        row.socket !== null ? "step-label anchorable" : "step-label",
        row.label,
      );
      if (row.socket !== null) {
        label.onclick = () => {
          this.state = selectAnchor(this.state, row.step_id);
          this.render();
        };
        label.title = `anchor: socket '${row.socket}'`;
      }
      item.append(label);
      if (row.owner !== null) {
        const owner = row.owner;
        const edit = el("button", "row-action", "edit");
        edit.onclick = () => this.guard(() => this.startEdit(owner));
        const remove = el("button", "row-action", "delete");
        remove.onclick = () => this.guard(() => this.deleteInteraction(owner));
        item.append(edit, remove);
      }
      list.append(item);
    }
    byId("anchor-label").textContent = anchorDescription(this.state);
  }

  private renderForm(): void {
    const panel = byId("form-fields");
    const title = byId("form-title");
    panel.replaceChildren();
    const model = this.state.formModel;
    if (!model) {
      title.textContent = "pick a component";
      return;
    }
    title.textContent = this.state.editingInteraction
      ? `edit ${model.title}`
      : `${model.title} -> ${anchorDescription(this.state)}`;
    for (const control of model.controls) {
      panel.append(this.renderControl(control));
    }
    const submit = el("button", "submit", this.state.editingInteraction
      ? "save changes" : "apply");
    submit.onclick = () => this.guard(() => this.submitForm());
    panel.append(submit);
  }

  private renderControl(control: FormControl): HTMLElement {
    const wrap = el("div", "field");
    const label = el("label", "", control.label);
    label.htmlFor = `field-${control.name}`;
    if (control.required) label.classList.add("required");
    wrap.append(label);
    const current = this.state.draft[control.name];
    const set = (value: RawValue) => {
      this.state = updateDraft(this.state, control.name, value);
    };
    wrap.append(makeInput(control, current, set));
    if (control.hint) wrap.append(el("small", "hint", control.hint));
    const error = this.state.fieldErrors[control.name];
    if (error) wrap.append(el("small", "field-error", error));
    return wrap;
  }

  private renderCode(): void {
    const view = byId("code-view");
    view.replaceChildren();
    const manifest = this.state.manifest;
    if (!manifest) return;
    for (const unit of manifest.units) {
      const header = unit.filename === manifest.entry
        ? `${unit.filename} (entry)` : unit.filename;
      view.append(el("h3", "", header));
      const lines = unit.text.split("\n");
      const pre = el("pre", "code");
      for (const span of unit.section_map) {
        pre.append(el("div", "section-marker", `--- ${span.section} ---`));
        const chunk = lines.slice(span.start_line - 1, span.end_line);
        pre.append(document.createTextNode(chunk.join("\n") + "\n"));
      }
      view.append(pre);
    }
  }

  private renderRun(): void {
    const run = this.state.lastRun;
    const exit = byId("run-exit");
    const stdout = byId("run-stdout");
    const stderr = byId("run-stderr");
    if (!run) {
      exit.textContent = "";
      stdout.textContent = "";
      stderr.textContent = "";
      return;
    }
    const failed = run.builds.filter((b) => !b.success);
    if (failed.length > 0) {
      exit.textContent = "build failed";
      stdout.textContent = "";
      stderr.textContent = failed
        .map((b) => `${b.filename}:\n${b.diagnostics ?? ""}`)
        .join("\n");
      return;
    }
    if (run.run) {
      exit.textContent = run.run.timed_out
        ? `timed out after ${run.run.wall_time.toFixed(1)}s`
        : `exit ${run.run.exit_code} in ${run.run.wall_time.toFixed(2)}s`;
      stdout.textContent = run.run.stdout;
      stderr.textContent = run.run.stderr;
    }
  }
}

function makeInput(
  control: FormControl,
  current: RawValue | undefined,
  set: (value: RawValue) => void,
): HTMLElement {
  switch (control.control) {
    case "checkbox": {
      const input = el("input");
      input.type = "checkbox";
      input.id = `field-${control.name}`;
      input.name = control.name;
      input.checked = current === true;
      input.onchange = () => set(input.checked);
      return input;
    }
    case "number": {
      const input = el("input");
      input.type = "number";
      input.id = `field-${control.name}`;
      input.name = control.name;
      input.value = String(current ?? 0);
      input.oninput = () => set(input.value);
      return input;
    }
    case "select": {
      const select = el("select");
      select.id = `field-${control.name}`;
      select.name = control.name;
      for (const choice of control.choices) {
        select.append(new Option(choice, choice));
      }
      if (typeof current === "string") select.value = current;
      select.onchange = () => set(select.value);
      return select;
    }
    case "list": {
      const wrap = el("div", "list-field");
      const items: string[] = Array.isArray(current) ? [...current] : [];
      const redraw = () => {
        wrap.replaceChildren();
        items.forEach((item, index) => {
          const row = el("div", "list-item");
          const input = el("input");
          input.type = "text";
          input.name = `${control.name}[${index}]`;
          input.value = item;
          input.oninput = () => {
            items[index] = input.value;
            set([...items]);
          };
          const remove = el("button", "row-action", "x");
          remove.onclick = (event) => {
            event.preventDefault();
            items.splice(index, 1);
            set([...items]);
            redraw();
          };
          row.append(input, remove);
          wrap.append(row);
        });
        const add = el("button", "row-action", "+ item");
        add.onclick = (event) => {
          event.preventDefault();
          items.push("");
          set([...items]);
          redraw();
        };
        wrap.append(add);
      };
      redraw();
      return wrap;
    }
    default: {
      const input = el("input");
      input.type = "text";
      input.id = `field-${control.name}`;
      input.name = control.name;
      input.value = typeof current === "string" ? current : "";
      input.oninput = () => set(input.value);
      return input;
    }
  }
}
