/**
 * Schema-driven form model. The interaction page is rendered purely from
 * the component's field schema: adding a component to a pack needs zero
 * UI changes. The model layer is DOM-free so fidelity (control names ==
 * schema field names) is testable without a browser.
 */

import type { FieldSchema, PageSchema, RawValue } from "./api.js";

export type ControlKind = "text" | "number" | "checkbox" | "select" | "list";

export interface FormControl {
  name: string;
  label: string;
  control: ControlKind;
  required: boolean;
  choices: string[];
  initial: RawValue;
  hint: string;
}

export interface FormModel {
  componentId: string;
  title: string;
  controls: FormControl[];
}

export type Draft = Record<string, RawValue>;

const CONTROL_BY_KIND: Record<FieldSchema["kind"], ControlKind> = {
  text: "text",
  integer: "number",
  boolean: "checkbox",
  enum: "select",
  "list-of-text": "list",
};

function zeroValue(kind: FieldSchema["kind"], choices: string[]): RawValue {
  switch (kind) {
    case "text":
      return "";
    case "integer":
      return 0;
    case "boolean":
      return false;
    case "enum":
      return choices[0] ?? "";
    case "list-of-text":
      return [];
  }
}

function hintFor(field: FieldSchema): string {
  const c = field.constraint ?? {};
  const parts: string[] = [];
  if (c.min !== undefined && c.max !== undefined) {
    parts.push(`${c.min}..${c.max}`);
  } else if (c.min !== undefined) {
    parts.push(`>= ${c.min}`);
  } else if (c.max !== undefined) {
    parts.push(`<= ${c.max}`);
  }
  if (c.pattern) parts.push(`pattern ${c.pattern}`);
  return parts.join(", ");
}

export function buildFormModel(page: PageSchema): FormModel {
  const controls = page.fields.map((field) => {
    const choices = field.constraint?.choices ?? [];
    return {
      name: field.name,
      label: field.name.replace(/_/g, " "),
      control: CONTROL_BY_KIND[field.kind],
      required: field.required,
      choices,
      initial: field.default ?? zeroValue(field.kind, choices),
      hint: hintFor(field),
    };
  });
  return {
    componentId: page.component_id,
    title: page.display_name,
    controls,
  };
}

/** Fresh draft values: the schema defaults, ready for editing. */
export function initialDraft(model: FormModel): Draft {
  const draft: Draft = {};
  for (const control of model.controls) {
    draft[control.name] = cloneValue(control.initial);
  }
  return draft;
}

/** Draft pre-filled from an existing interaction's bindings. */
export function draftFromBindings(
  model: FormModel,
  bindings: Record<string, RawValue>,
): Draft {
  const draft = initialDraft(model);
  for (const control of model.controls) {
    if (control.name in bindings) {
      draft[control.name] = cloneValue(bindings[control.name]);
    }
  }
  return draft;
}

/**
 * The exact payload submitted for the form: one entry per schema field,
 * no extras, no omissions.
 */
export function collectRaw(model: FormModel, draft: Draft): Draft {
  const raw: Draft = {};
  for (const control of model.controls) {
    const value = draft[control.name];
    raw[control.name] =
      value === undefined ? cloneValue(control.initial) : cloneValue(value);
  }
  return raw;
}

function cloneValue(value: RawValue): RawValue {
  return Array.isArray(value) ? [...value] : value;
}
