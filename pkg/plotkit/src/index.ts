export {
  SchemaError,
  parseCsv,
  requireColumns,
  requireRows,
  column,
  numericColumn,
  tableName,
} from "./csv.js";
export type { Table } from "./csv.js";
export {
  FIGURE_KINDS,
  render,
  renderFigure,
  renderSelectionProb,
  renderRoc,
  renderGiniRadius,
  renderLocalCmeStrip,
} from "./figures.js";
export type { FigureKind, FigureSpec } from "./figures.js";
export { main } from "./cli.js";
