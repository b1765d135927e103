/** Infix rendering of constraint expressions from their AST JSON, so the
 * analyst reads `r >= 200` rather than s-expressions. */

import type { ExprNode } from "./api.js";

const OPS: Record<string, string> = {
  "and": "and", "or": "or", "=>": "⇒", "iff": "⇔",
  "<": "<", "<=": "≤", ">": ">", ">=": "≥",
  "=": "=", "!=": "≠", "+": "+", "-": "−", "*": "×", "/": "÷",
};

function isLeafString(node: ExprNode): node is string {
  return typeof node === "string";
}

export function renderInfix(node: ExprNode): string {
  if (typeof node === "boolean") return node ? "true" : "false";
  if (typeof node === "number") return String(node);
  if (isLeafString(node)) return node;
  const [head, ...args] = node;
  if (typeof head !== "string") return JSON.stringify(node);
  if (head === "not") return `not ${wrap(args[0])}`;
  if (head === "neg") return `−${wrap(args[0])}`;
  if (head === "ite") {
    return `(if ${renderInfix(args[0])} then ${renderInfix(args[1])} else ${renderInfix(args[2])})`;
  }
  const sym = OPS[head];
  if (!sym) return JSON.stringify(node);
  return args.map(wrap).join(` ${sym} `);
}

function wrap(node: ExprNode): string {
  if (Array.isArray(node)) {
    const head = node[0];
    if (head !== "not" && head !== "neg" && head !== "ite") {
      return `(${renderInfix(node)})`;
    }
  }
  return renderInfix(node);
}
