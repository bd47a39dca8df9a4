import { describe, expect, it } from "vitest";

import {
  SchemaError,
  column,
  numericColumn,
  parseCsv,
  requireColumns,
  requireRows,
  tableName,
} from "../src/csv.js";

describe("tableName", () => {
  it("strips directories and the extension", () => {
    expect(tableName("out/run1/summary.csv")).toBe("summary");
  });

  it("only strips the final extension", () => {
    expect(tableName("series_F8.5.csv")).toBe("series_F8.5");
  });
});

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n", "t");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("tolerates a missing trailing newline", () => {
    expect(parseCsv("a,b\n1,2", "t").rows).toEqual([["1", "2"]]);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "t")).toThrow(SchemaError);
    expect(() => parseCsv("", "t")).toThrow(/file is empty/);
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseCsv("a,b\n1,2\n1,2,3\n", "t")).toThrow(/row 2 has 3 cells/);
  });
});

describe("requireColumns", () => {
  const t = parseCsv("threshold,FPR,TPR\ninf,0,0\n", "roc_x");

  it("accepts a table with all required columns", () => {
    expect(() => requireColumns(t, ["FPR", "TPR"])).not.toThrow();
  });

  it("names both the missing and the found columns", () => {
    expect(() => requireColumns(t, ["FPR", "gini", "K"])).toThrow(
      /roc_x: missing column\(s\) gini, K; found threshold, FPR, TPR/,
    );
  });
});

describe("requireRows", () => {
  it("rejects a header-only table", () => {
    const t = parseCsv("a,b\n", "empty");
    expect(() => requireRows(t)).toThrow(/empty: no data rows/);
  });
});

describe("column access", () => {
  const t = parseCsv("x,y\n1,2.5\n2,nan\n", "t");

  it("returns raw strings", () => {
    expect(column(t, "x")).toEqual(["1", "2"]);
  });

  it("rejects unknown names", () => {
    expect(() => column(t, "z")).toThrow(SchemaError);
  });

  it("parses numbers and passes nan through", () => {
    const v = numericColumn(t, "y");
    expect(v[0]).toBe(2.5);
    expect(v[1]).toBeNaN();
  });

  it("rejects non-numeric cells with the row number", () => {
    const bad = parseCsv("y\noops\n", "t");
    expect(() => numericColumn(bad, "y")).toThrow(/column y, row 1: not a number \(oops\)/);
  });
});
