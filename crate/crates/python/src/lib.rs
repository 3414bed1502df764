//! Python extension module exposing the codec: segmentation, encoding,
//! decoding, thresholding, ROI coding and quality metrics.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use rbepwt::codec::{CoeffId, EncodedImage};
use rbepwt::error::Error;
use rbepwt::path::{Metric, PathMode};
use rbepwt::wavelet::BankKind;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(s: &str) -> PyResult<PathMode> {
    match s {
        "easy" => Ok(PathMode::Easy),
        "grad" => Ok(PathMode::Grad),
        "epwt" => Ok(PathMode::Epwt),
        _ => Err(PyValueError::new_err(format!(
            "unknown path mode {s:?}, expected easy|grad|epwt"
        ))),
    }
}

fn parse_bank(s: &str) -> PyResult<BankKind> {
    match s {
        "haar" => Ok(BankKind::Haar),
        "cdf97" => Ok(BankKind::Cdf97),
        _ => Err(PyValueError::new_err(format!(
            "unknown wavelet {s:?}, expected haar|cdf97"
        ))),
    }
}

fn parse_metric(s: &str) -> PyResult<Metric> {
    match s {
        "euclidean" => Ok(Metric::Euclidean),
        "chebyshev" => Ok(Metric::Chebyshev),
        _ => Err(PyValueError::new_err(format!(
            "unknown distance {s:?}, expected euclidean|chebyshev"
        ))),
    }
}

/// A grayscale image with float64 pixels, row-major.
#[pyclass(name = "GrayImage", from_py_object)]
#[derive(Clone)]
struct PyGrayImage {
    inner: rbepwt::GrayImage,
}

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, pixels: Vec<f64>) -> PyResult<Self> {
        if pixels.len() != width * height {
            return Err(PyValueError::new_err("pixel count mismatch"));
        }
        Ok(PyGrayImage {
            inner: rbepwt::GrayImage::new(width, height, pixels),
        })
    }

    /// Loads a PGM (P2 or P5) file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyGrayImage {
            inner: rbepwt::load_image(path).map_err(to_py)?,
        })
    }

    /// Writes a binary PGM, rounding half-up and clamping to bytes.
    fn save(&self, path: &str) -> PyResult<()> {
        rbepwt::save_image(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn pixels(&self) -> Vec<f64> {
        self.inner.pixels().to_vec()
    }

    fn get(&self, row: usize, col: usize) -> f64 {
        self.inner.get(rbepwt::Coord::new(row, col))
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Per-pixel region labels from segmentation.
#[pyclass(name = "LabelMap", from_py_object)]
#[derive(Clone)]
struct PyLabelMap {
    inner: rbepwt::LabelMap,
}

#[pymethods]
impl PyLabelMap {
    #[new]
    fn new(width: usize, height: usize, labels: Vec<u32>) -> PyResult<Self> {
        Ok(PyLabelMap {
            inner: rbepwt::LabelMap::new(width, height, labels).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyLabelMap {
            inner: rbepwt::load_label_map(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        rbepwt::save_label_map(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn region_count(&self) -> u32 {
        self.inner.region_count()
    }

    fn labels(&self) -> Vec<u32> {
        self.inner.labels().to_vec()
    }

    fn perimeter(&self) -> usize {
        rbepwt::perimeter(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "LabelMap({}x{}, {} regions)",
            self.inner.width(),
            self.inner.height(),
            self.inner.region_count()
        )
    }
}

/// An encoded image: metadata plus all wavelet coefficients.
#[pyclass(name = "Encoded", from_py_object)]
#[derive(Clone)]
struct PyEncoded {
    inner: EncodedImage,
}

#[pymethods]
impl PyEncoded {
    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner.mode {
            PathMode::Easy => "easy",
            PathMode::Grad => "grad",
            PathMode::Epwt => "epwt",
        }
    }

    #[getter]
    fn wavelet(&self) -> &'static str {
        self.inner.bank.name()
    }

    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height
    }

    #[getter]
    fn coeff_count(&self) -> usize {
        self.inner.coeff_count()
    }

    #[getter]
    fn nonzero_count(&self) -> usize {
        self.inner.nonzero_count()
    }

    #[getter]
    fn label_map(&self) -> PyLabelMap {
        PyLabelMap {
            inner: self.inner.labelmap.clone(),
        }
    }

    /// Serializes to the RBE1 container format.
    fn to_bytes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = rbepwt::serialize(&self.inner).map_err(to_py)?;
        Ok(PyBytes::new(py, &bytes))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(PyEncoded {
            inner: rbepwt::deserialize(data).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Encoded({}, {}, {} levels, {} coefficients)",
            self.mode(),
            self.inner.bank,
            self.inner.levels,
            self.inner.coeff_count()
        )
    }
}

/// Felzenszwalb-Huttenlocher segmentation.
#[pyfunction]
#[pyo3(signature = (img, k=200.0, sigma=0.0, min_size=10))]
fn fh_segment(img: &PyGrayImage, k: f64, sigma: f64, min_size: usize) -> PyResult<PyLabelMap> {
    if !(k >= 0.0 && k.is_finite()) || !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(PyValueError::new_err("k and sigma must be non-negative"));
    }
    Ok(PyLabelMap {
        inner: rbepwt::fh_segment(&img.inner, rbepwt::SegParams::new(k, sigma, min_size)),
    })
}

/// Encodes an image against a segmentation.
#[pyfunction]
#[pyo3(signature = (img, label_map, mode="easy", wavelet="cdf97", levels=None, distance="euclidean"))]
fn encode(
    img: &PyGrayImage,
    label_map: &PyLabelMap,
    mode: &str,
    wavelet: &str,
    levels: Option<usize>,
    distance: &str,
) -> PyResult<PyEncoded> {
    let levels = levels.unwrap_or_else(|| {
        (usize::BITS - 1 - img.inner.pixel_count().leading_zeros()) as usize
    });
    let enc = rbepwt::encode(
        &img.inner,
        &label_map.inner,
        parse_mode(mode)?,
        parse_metric(distance)?,
        parse_bank(wavelet)?,
        levels,
    )
    .map_err(to_py)?;
    Ok(PyEncoded { inner: enc })
}

/// Decodes back to an image.
#[pyfunction]
fn decode(enc: &PyEncoded) -> PyResult<PyGrayImage> {
    Ok(PyGrayImage {
        inner: rbepwt::decode(&enc.inner).map_err(to_py)?,
    })
}

/// Keeps the n largest-magnitude coefficients.
#[pyfunction]
fn keep_n_largest(enc: &PyEncoded, n: usize) -> PyResult<PyEncoded> {
    Ok(PyEncoded {
        inner: rbepwt::keep_n_largest(&enc.inner, n).map_err(to_py)?,
    })
}

/// Two-tier ROI thresholding (Haar, full levels).
#[pyfunction]
fn roi_threshold(
    enc: &PyEncoded,
    roi_labels: Vec<u32>,
    roi_fraction: f64,
    rest_fraction: f64,
) -> PyResult<PyEncoded> {
    Ok(PyEncoded {
        inner: rbepwt::roi_threshold(&enc.inner, &roi_labels, roi_fraction, rest_fraction)
            .map_err(to_py)?,
    })
}

/// Keeps exactly the coefficients influenced by the ROI regions.
#[pyfunction]
fn keep_ancestors_only(enc: &PyEncoded, roi_labels: Vec<u32>) -> PyResult<PyEncoded> {
    Ok(PyEncoded {
        inner: rbepwt::keep_ancestors_only(&enc.inner, &roi_labels).map_err(to_py)?,
    })
}

/// Base-2 PSNR over the unnormalized difference norm; inf for equal images.
#[pyfunction]
fn psnr_paper(a: &PyGrayImage, b: &PyGrayImage) -> PyResult<f64> {
    rbepwt::psnr_paper(&a.inner, &b.inner).map_err(to_py)
}

/// Conventional PSNR in dB; inf for equal images.
#[pyfunction]
fn psnr_std(a: &PyGrayImage, b: &PyGrayImage) -> PyResult<f64> {
    match rbepwt::psnr_std(&a.inner, &b.inner) {
        Ok(v) => Ok(v),
        Err(Error::IdenticalImages) => Ok(f64::INFINITY),
        Err(e) => Err(to_py(e)),
    }
}

/// Decoded unit-coefficient image. Level 0 is the approximation vector,
/// level j >= 1 the stored detail vector j-1 (lowest level first).
#[pyfunction]
fn basis_element(enc: &PyEncoded, level: usize, index: usize) -> PyResult<PyGrayImage> {
    let id = if level == 0 {
        CoeffId::approx(index)
    } else {
        CoeffId::detail(level - 1, index)
    };
    Ok(PyGrayImage {
        inner: rbepwt::basis_element(&enc.inner, id).map_err(to_py)?,
    })
}

#[pymodule]
fn rbepwt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyLabelMap>()?;
    m.add_class::<PyEncoded>()?;
    m.add_function(wrap_pyfunction!(fh_segment, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(keep_n_largest, m)?)?;
    m.add_function(wrap_pyfunction!(roi_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(keep_ancestors_only, m)?)?;
    m.add_function(wrap_pyfunction!(psnr_paper, m)?)?;
    m.add_function(wrap_pyfunction!(psnr_std, m)?)?;
    m.add_function(wrap_pyfunction!(basis_element, m)?)?;
    Ok(())
}
