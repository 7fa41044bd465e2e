//! Python bindings: plants and products as opaque handles that move in and
//! out of the `.desa` text format.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use subobs::desa::{product_state_names, resolve_states};
use subobs::oracle::{random_automaton, GeneratorConfig};
use subobs::{
    canonically_equal, compose_with_observer, fixtures, parse_desa, refine, serialize_plant, serialize_product,
    synthesize, synthesize_fast, verify_current_state_opacity, Automaton, DesaDocument, ProductAutomaton, StateNames,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A plant automaton.
#[pyclass(name = "Plant", module = "subobs", frozen)]
struct Plant {
    automaton: Automaton,
    names: StateNames,
}

#[pymethods]
impl Plant {
    #[staticmethod]
    fn from_desa(text: &str) -> PyResult<Self> {
        match parse_desa(text).map_err(value_error)? {
            DesaDocument::Plant { automaton, names } => Ok(Self { automaton, names }),
            DesaDocument::Product { .. } => Err(PyValueError::new_err("expected a plant, got a product")),
        }
    }

    fn to_desa(&self) -> String {
        serialize_plant(&self.automaton, &self.names)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.automaton.num_states()
    }

    #[getter]
    fn events(&self) -> Vec<String> {
        self.automaton.alphabet().iter().map(|(_, e)| e.name.clone()).collect()
    }

    fn is_opaque(&self) -> bool {
        verify_current_state_opacity(&self.automaton)
    }

    fn compose(&self) -> Product {
        Product { product: compose_with_observer(&self.automaton), names: self.names.clone() }
    }

    /// The supervisor realization, or `None` when no supervisor exists.
    #[pyo3(signature = (fast = false))]
    fn synthesize(&self, fast: bool) -> Option<Product> {
        let s = if fast { synthesize_fast(&self.automaton) } else { synthesize(&self.automaton) };
        (!s.is_null()).then(|| Product { product: s.into_realization(), names: self.names.clone() })
    }

    /// The plant under its synthesized supervisor, or `None`.
    fn closed_loop(&self) -> PyResult<Option<Plant>> {
        let s = synthesize(&self.automaton);
        if s.is_null() {
            return Ok(None);
        }
        let automaton = s.closed_loop(&self.automaton).map_err(value_error)?;
        Ok(Some(Plant { automaton, names: StateNames::default() }))
    }

    fn __repr__(&self) -> String {
        format!("Plant(states={}, events={})", self.automaton.num_states(), self.automaton.alphabet().len())
    }
}

/// A plant composed with its observer; states are named `q|a,b`.
#[pyclass(name = "Product", module = "subobs", frozen)]
struct Product {
    product: ProductAutomaton,
    names: StateNames,
}

#[pymethods]
impl Product {
    #[staticmethod]
    fn from_desa(text: &str) -> PyResult<Self> {
        match parse_desa(text).map_err(value_error)? {
            DesaDocument::Product { product, names } => Ok(Self { product, names }),
            DesaDocument::Plant { .. } => Err(PyValueError::new_err("expected a product, got a plant")),
        }
    }

    fn to_desa(&self) -> String {
        serialize_product(&self.product, &self.names)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.product.num_states()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        product_state_names(&self.product, &self.names)
    }

    #[getter]
    fn marked(&self) -> Vec<String> {
        let names = product_state_names(&self.product, &self.names);
        self.product.marked_states().map(|i| names[i].clone()).collect()
    }

    /// Make the named states (and whatever reaches them uncontrollably)
    /// inaccessible.
    fn refine(&self, delta: Vec<String>) -> PyResult<Product> {
        let delta = resolve_states(&self.product, &self.names, &delta).map_err(PyKeyError::new_err)?;
        let product = refine(&self.product, &delta).map_err(value_error)?;
        Ok(Product { product, names: self.names.clone() })
    }

    fn canonically_equals(&self, other: &Product) -> bool {
        canonically_equal(&self.product, &other.product)
    }

    fn __repr__(&self) -> String {
        format!("Product(states={}, marked={})", self.product.num_states(), self.product.marked_states().count())
    }
}

/// One of the bundled example plants: `f1`, `f2`, `f4`, `worked_example`,
/// `secret_loop` or `unenforceable`.
#[pyfunction]
fn fixture(name: &str) -> PyResult<Plant> {
    let automaton = match name {
        "f1" => fixtures::f1(),
        "f2" => fixtures::f2(),
        "f4" => fixtures::f4(),
        "worked_example" => fixtures::worked_example(),
        "secret_loop" => fixtures::secret_loop(),
        "unenforceable" => fixtures::unenforceable(),
        _ => return Err(PyKeyError::new_err(format!("no fixture named {name:?}"))),
    };
    Ok(Plant { automaton, names: StateNames::default() })
}

#[pyfunction]
#[pyo3(signature = (seed, states = 8, events = 4))]
fn random_plant(seed: u64, states: usize, events: usize) -> PyResult<Plant> {
    let cfg = GeneratorConfig { states: 1..=states, events: 1..=events, seed, ..Default::default() };
    let automaton = random_automaton(&cfg).map_err(value_error)?;
    Ok(Plant { automaton, names: StateNames::default() })
}

#[pymodule]
#[pyo3(name = "subobs")]
fn subobs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Plant>()?;
    m.add_class::<Product>()?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(random_plant, m)?)?;
    Ok(())
}
