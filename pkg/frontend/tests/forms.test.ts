/**
 * Form fidelity: interaction pages are rendered purely from the schema,
 * and the submitted field names always equal the schema field names --
 * for every component in the reference pack, not just the easy ones.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { FieldSchema, PageSchema } from "../src/api.js";
import {
  buildFormModel,
  collectRaw,
  draftFromBindings,
  initialDraft,
} from "../src/forms.js";

const PACK_PATH = fileURLToPath(
  new URL("../../src/stw/data/reference.pack.json", import.meta.url),
);

interface PackComponent {
  component_id: string;
  display_name: string;
  page: { fields: Partial<FieldSchema>[] };
}

function loadPackPages(): PageSchema[] {
  const doc = JSON.parse(readFileSync(PACK_PATH, "utf-8"));
  return (doc.components as PackComponent[]).map((component) => ({
    component_id: component.component_id,
    display_name: component.display_name,
    fields: component.page.fields.map((field) => ({
      name: field.name!,
      kind: field.kind!,
      required: field.required ?? false,
      default: field.default ?? null,
      constraint: field.constraint ?? null,
    })),
  }));
}

describe("form fidelity against the reference pack", () => {
  const pages = loadPackPages();

  it("covers the whole pack", () => {
    expect(pages.length).toBe(18);
  });

  for (const page of pages) {
    it(`control names equal schema field names for ${page.component_id}`, () => {
      const model = buildFormModel(page);
      const controlNames = model.controls.map((c) => c.name);
      const schemaNames = page.fields.map((f) => f.name);
      expect(controlNames).toEqual(schemaNames);

      const submitted = collectRaw(model, initialDraft(model));
      expect(Object.keys(submitted)).toEqual(schemaNames);
    });
  }

  it("renders exactly one control per field, in schema order", () => {
    const page: PageSchema = {
      component_id: "x",
      display_name: "X",
      fields: [
        { name: "message", kind: "text", required: true, default: "hi",
          constraint: null },
        { name: "times", kind: "integer", required: true, default: 1,
          constraint: { min: 1, max: 9 } },
      ],
    };
    const model = buildFormModel(page);
    expect(model.controls.map((c) => [c.name, c.control])).toEqual([
      ["message", "text"],
      ["times", "number"],
    ]);
  });

  it("maps each field kind to its control", () => {
    const byId = new Map(
      pages.map((page) => [page.component_id, buildFormModel(page)]),
    );
    const repeat = byId.get("flow.repeat")!;
    expect(repeat.controls[0].control).toBe("number");
    const label = byId.get("form.label")!;
    expect(label.controls.find((c) => c.name === "style")!.control)
      .toBe("select");
    const window = byId.get("form.window")!;
    expect(window.controls.find((c) => c.name === "menu")!.control)
      .toBe("list");
    const assign = byId.get("var.assign")!;
    expect(assign.controls.find((c) => c.name === "declare")!.control)
      .toBe("checkbox");
  });

  it("shows schema defaults as initial values", () => {
    const print = pages.find((p) => p.component_id === "io.print")!;
    const model = buildFormModel(print);
    expect(initialDraft(model)).toEqual({ message: "Hello, World!" });
  });

  it("enum controls carry their choices and default to the first", () => {
    const label = pages.find((p) => p.component_id === "form.label")!;
    const model = buildFormModel(label);
    const style = model.controls.find((c) => c.name === "style")!;
    expect(style.choices).toEqual(["label", "heading"]);
    expect(initialDraft(model).style).toBe("label");
  });

  it("prefills drafts from existing bindings for editing", () => {
    const print = pages.find((p) => p.component_id === "io.print")!;
    const model = buildFormModel(print);
    const draft = draftFromBindings(model, { message: "Bye" });
    expect(draft).toEqual({ message: "Bye" });
  });

  it("never submits extra keys even when the draft has strays", () => {
    const print = pages.find((p) => p.component_id === "io.print")!;
    const model = buildFormModel(print);
    const draft = { message: "x", stray: "nope" };
    expect(Object.keys(collectRaw(model, draft))).toEqual(["message"]);
  });

  it("clones list values so drafts do not alias submissions", () => {
    const window = pages.find((p) => p.component_id === "form.window")!;
    const model = buildFormModel(window);
    const draft = initialDraft(model);
    (draft.menu as string[]).push("File");
    const submitted = collectRaw(model, draft);
    (submitted.menu as string[]).push("MUTATED");
    expect(draft.menu).toEqual(["File"]);
  });
});
