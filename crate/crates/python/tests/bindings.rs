use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(script: &std::ffi::CStr) {
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(ncvem_py::ncvem_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("ncvem", module).unwrap();
        if let Err(e) = py.run(script, Some(&globals), None) {
            e.display(py);
            panic!("python script failed: {e}");
        }
    });
}

#[test]
fn patch_test_is_exact() {
    run(c"
mesh = ncvem.Mesh.generate('voronoi', 16, seed=3)
s = ncvem.solve(mesh, case='poly-2', k=2)
assert max(s.e1, s.e0, s.ep) < 1e-9, s
assert s.n_velocity == len(s.velocity)
assert len(s.pressure) == mesh.n_cells
");
}

#[test]
fn mesh_from_arrays_and_errors() {
    run(c"
m = ncvem.Mesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]])
assert (m.n_cells, m.n_edges, m.n_vertices) == (1, 4, 4)
assert abs(m.h - 2 ** 0.5) < 1e-15
try:
    ncvem.Mesh.generate('hex', 4)
    raise AssertionError('accepted unknown family')
except ValueError as e:
    assert 'hex' in str(e)
try:
    ncvem.solve(m, case='nope')
    raise AssertionError('accepted unknown case')
except ValueError:
    pass
assert 'trig' in ncvem.cases()
");
}

#[test]
fn convergence_and_infsup() {
    run(c"
csv = ncvem.convergence('trig', 1, 'quad', [4, 8, 16])
rows = [r.split(',') for r in csv.strip().splitlines()]
assert rows[0][:3] == ['level', 'h', 'Nu']
assert len(rows) == 4
rate = float(rows[-1][7])
assert 0.8 < rate < 1.3, rate
assert ncvem.infsup(ncvem.Mesh.generate('quad', 3), k=2) > 0.0
");
}

#[test]
fn mesh_round_trip() {
    let dir = std::env::temp_dir().join(format!("ncvem-py-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mesh.json");
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(ncvem_py::ncvem_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("ncvem", module).unwrap();
        globals.set_item("path", path.to_str().unwrap()).unwrap();
        py.run(
            c"
a = ncvem.Mesh.generate('distorted', 5, seed=2)
a.save(path)
b = ncvem.Mesh.load(path)
assert a.vertices == b.vertices and a.cells == b.cells
",
            Some(&globals),
            None,
        )
        .unwrap();
    });
    std::fs::remove_dir_all(&dir).unwrap();
}
