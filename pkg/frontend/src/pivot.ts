/** Pivot view model: expansion state applied to the server's roll-ups.
 *
 * All values come from the delivered cell map; collapsing a header just
 * switches which prefix cell is shown. Nothing is aggregated here.
 */

import type { PivotExpansion } from "./state.js";
import type { PivotCell, PivotModel, PivotNode, Scalar } from "./types.js";

export interface VisibleLeaf {
  path: Scalar[];
  collapsed: boolean; // true when this leaf stands for a collapsed subtree
}

function cellKey(col: Scalar[], row: Scalar[]): string {
  return JSON.stringify([col, row]);
}

export function cellIndex(model: PivotModel): Map<string, (number | null)[]> {
  const index = new Map<string, (number | null)[]>();
  for (const cell of model.cells as PivotCell[]) {
    index.set(cellKey(cell.col, cell.row), cell.values);
  }
  return index;
}

function pathIn(paths: Scalar[][], path: Scalar[]): boolean {
  return paths.some((p) => p.length === path.length && p.every((v, i) => v === path[i]));
}

/** Leaf columns/rows under the given expansion; collapsed nodes become
 * leaves showing their prefix roll-up. */
export function visibleLeaves(tree: PivotNode[], expanded: Scalar[][]): VisibleLeaf[] {
  const leaves: VisibleLeaf[] = [];
  const walk = (node: PivotNode, prefix: Scalar[]) => {
    const path = [...prefix, node.value];
    if (node.children.length === 0) {
      leaves.push({ path, collapsed: false });
    } else if (!pathIn(expanded, path)) {
      leaves.push({ path, collapsed: true });
    } else {
      for (const child of node.children) walk(child, path);
    }
  };
  for (const root of tree) walk(root, []);
  if (leaves.length === 0) leaves.push({ path: [], collapsed: false });
  return leaves;
}

/** Every internal-node path (the "fully expanded" expansion state). */
export function allExpandablePaths(tree: PivotNode[]): Scalar[][] {
  const paths: Scalar[][] = [];
  const walk = (node: PivotNode, prefix: Scalar[]) => {
    const path = [...prefix, node.value];
    if (node.children.length > 0) {
      paths.push(path);
      for (const child of node.children) walk(child, path);
    }
  };
  for (const root of tree) walk(root, []);
  return paths;
}

export function fullExpansion(model: PivotModel): PivotExpansion {
  return {
    cols: allExpandablePaths(model.col_tree),
    rows: allExpandablePaths(model.row_tree),
  };
}

export interface PivotGrid {
  colLeaves: VisibleLeaf[];
  rowLeaves: VisibleLeaf[];
  measures: string[];
  /** values[r][c * measures.length + m], straight from the cell map */
  values: (number | null)[][];
}

export function pivotGrid(model: PivotModel, expansion: PivotExpansion): PivotGrid {
  const index = cellIndex(model);
  const colLeaves = visibleLeaves(model.col_tree, expansion.cols);
  const rowLeaves = visibleLeaves(model.row_tree, expansion.rows);
  const nm = model.measures.length;
  const values = rowLeaves.map((row) =>
    colLeaves.flatMap((col) => {
      const found = index.get(cellKey(col.path, row.path));
      return found ?? Array<number | null>(nm).fill(null);
    }),
  );
  return { colLeaves, rowLeaves, measures: model.measures, values };
}
