// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { compile, bounds, equivalence } from "./pkg/wfc_web.js";

const examples = {
  smokers: `#domain a b c.
smokes(X) :- stress(X).
smokes(X) :- fr(X,Y), smokes(Y).`,
  gear: `turns1(0) :- turns2(0).
turns2(0) :- turns1(0).
turns1(1) :- turns2(1).
turns2(1) :- turns1(1).
turns1(1) :- turns1(0), not button1(0).
turns2(1) :- turns2(0), not button2(0).
turns1(1) :- not turns1(0), button1(0).
turns2(1) :- not turns2(0), button2(0).`,
  nt: `a :- not b.
b :- not a.
c :- not b.
c :- e.
d :- a, not c.`,
};

const $ = (id) => document.getElementById(id);

function show(id, html) {
  $(id).innerHTML = html;
}

function escape(s) {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function guarded(id, f) {
  try {
    f();
  } catch (e) {
    show(id, `<p class="error">${escape(String(e.message ?? e))}</p>`);
  }
}

function runCompile() {
  guarded("compile-out", () => {
    const r = JSON.parse(compile($("program").value, $("backend").value));
    const steps = r.trace.steps;
    const atoms = steps.length ? steps[0].atoms.map((a) => a.atom) : [];
    let html = `<p>${r.exact ? "exact" : "not exact"}, ${steps.length} states</p><table><tr><th>step</th>`;
    html += atoms.map((a) => `<th>${escape(a)}</th>`).join("") + "</tr>";
    for (const s of steps) {
      html += `<tr><td>${s.i} ${s.kind}</td>`;
      html += s.atoms.map((a) => `<td>(${escape(a.lower)}, ${escape(a.upper)})</td>`).join("");
      html += "</tr>";
    }
    show("compile-out", html + "</table>");
    $("dot").textContent = r.dot;
  });
}

function runBounds() {
  guarded("bounds-out", () => {
    const r = JSON.parse(bounds($("program").value, $("weights").value, $("evidence").value));
    let html = "<table><tr><th>step</th><th>lower</th><th>upper</th></tr>";
    for (const s of r.steps) {
      html += `<tr><td>${s.i} ${s.kind}</td><td>${s.lo.toPrecision(6)}</td><td>${s.hi.toPrecision(6)}</td></tr>`;
    }
    show("bounds-out", html + "</table>");
  });
}

function runEquiv() {
  guarded("equiv-out", () => {
    const r = JSON.parse(equivalence($("program").value, $("other").value));
    if (r.equivalent) {
      show("equiv-out", "<p>equivalent</p>");
    } else {
      const w = r.witness;
      show(
        "equiv-out",
        `<p>different: with parameters {${escape(w.parameters.join(", "))}} ` +
          `${escape(w.atom)} is ${w.left} on the left and ${w.right} on the right</p>`,
      );
    }
  });
}

function loadExample() {
  $("program").value = examples[$("example").value];
  $("other").value = examples[$("example").value];
}

await init();
$("example").addEventListener("change", loadExample);
$("compile").addEventListener("click", runCompile);
$("bounds").addEventListener("click", runBounds);
$("equiv").addEventListener("click", runEquiv);
loadExample();
$("weights").value = "stress(a) 0.2 0.8\nstress(b) 0.2 0.8\nstress(c) 0.2 0.8";
runCompile();
