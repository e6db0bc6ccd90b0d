//! White-background guidance math.
//!
//! The loss penalizes non-white pixels inside a mask of the decoded image:
//!
//! ```text
//! L = s * || D(x0) - mask(D(x0)) ||^2,   x0 = predict(x_t, t)
//! ```
//!
//! where `mask(.)` paints the masked pixels white. Its gradient with respect
//! to the noisy latent drives the update
//!
//! ```text
//! x_t <- x_t - mask_latent(grad * (1 - alpha_bar_t) / alpha_bar_t)
//! ```
//!
//! The decoder and the denoising predictor are pluggable; when both provide a
//! vector-Jacobian product the gradient is exact, otherwise it falls back to
//! central finite differences.

use crate::error::GuidanceError;

/// Central finite-difference step used when no backward pass is available.
pub const FD_STEP: f64 = 1e-4;

/// Dense row-major tensor of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, GuidanceError> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || expected != data.len() {
            return Err(GuidanceError::ShapeMismatch(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GuidanceError::NonFinite("tensor data"));
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self, GuidanceError> {
        let n = shape.iter().product();
        Self::new(shape, vec![value; n])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(height, width)` from the last two dimensions; 1-D tensors are a single row.
    pub fn spatial(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [w] => (1, *w),
            [.., h, w] => (*h, *w),
            [] => (0, 0),
        }
    }

    fn with_data(&self, data: Vec<f64>) -> Result<Self, GuidanceError> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GuidanceError::NonFinite("tensor update"));
        }
        Ok(Self { shape: self.shape.clone(), data })
    }
}

/// Boolean grid marking the image region that should become white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self, GuidanceError> {
        if width * height != data.len() || data.is_empty() {
            return Err(GuidanceError::ShapeMismatch(format!(
                "mask {width}x{height} needs {} cells, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let data = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, data }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&m| m).count()
    }
}

/// [`PixelMask`] at latent resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

/// Tensor-to-tensor map with an optional vector-Jacobian product.
pub trait LatentMap {
    fn forward(&self, input: &Tensor) -> Result<Tensor, GuidanceError>;

    /// `J(input)^T * cotangent`, or `None` when no backward pass exists.
    fn backward(&self, _input: &Tensor, _cotangent: &Tensor) -> Option<Result<Tensor, GuidanceError>> {
        None
    }
}

/// Estimate of the clean latent from the noisy one at step `t`.
pub trait Predictor {
    fn predict(&self, x_t: &Tensor, t: usize) -> Result<Tensor, GuidanceError>;

    fn backward(&self, _x_t: &Tensor, _t: usize, _cotangent: &Tensor) -> Option<Result<Tensor, GuidanceError>> {
        None
    }
}

/// Returns its input; differentiable.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl LatentMap for Identity {
    fn forward(&self, input: &Tensor) -> Result<Tensor, GuidanceError> {
        Ok(input.clone())
    }

    fn backward(&self, _input: &Tensor, cotangent: &Tensor) -> Option<Result<Tensor, GuidanceError>> {
        Some(Ok(cotangent.clone()))
    }
}

impl Predictor for Identity {
    fn predict(&self, x_t: &Tensor, _t: usize) -> Result<Tensor, GuidanceError> {
        Ok(x_t.clone())
    }

    fn backward(&self, _x_t: &Tensor, _t: usize, cotangent: &Tensor) -> Option<Result<Tensor, GuidanceError>> {
        Some(Ok(cotangent.clone()))
    }
}

/// Affine decoder `y = W x + b`, reshaped to `out_shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDecoder {
    /// Row-major `out_len x in_len`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_len: usize,
    pub out_shape: Vec<usize>,
}

impl LinearDecoder {
    pub fn new(weights: Vec<f64>, bias: Vec<f64>, in_len: usize, out_shape: Vec<usize>) -> Result<Self, GuidanceError> {
        let out_len: usize = out_shape.iter().product();
        if weights.len() != out_len * in_len || bias.len() != out_len {
            return Err(GuidanceError::ShapeMismatch(format!(
                "linear decoder {out_len}x{in_len} got {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        Ok(Self { weights, bias, in_len, out_shape })
    }
}

impl LatentMap for LinearDecoder {
    fn forward(&self, input: &Tensor) -> Result<Tensor, GuidanceError> {
        if input.len() != self.in_len {
            return Err(GuidanceError::ShapeMismatch(format!(
                "decoder expects {} inputs, got {}",
                self.in_len,
                input.len()
            )));
        }
        let out = self
            .weights
            .chunks_exact(self.in_len)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(&input.data).map(|(w, x)| w * x).sum::<f64>())
            .collect();
        Tensor::new(self.out_shape.clone(), out)
    }

    fn backward(&self, input: &Tensor, cotangent: &Tensor) -> Option<Result<Tensor, GuidanceError>> {
        let mut grad = vec![0.0; self.in_len];
        for (row, c) in self.weights.chunks_exact(self.in_len).zip(&cotangent.data) {
            for (g, w) in grad.iter_mut().zip(row) {
                *g += w * c;
            }
        }
        Some(Tensor::new(input.shape.clone(), grad))
    }
}

fn check_mask(img: &Tensor, mask: &PixelMask) -> Result<(), GuidanceError> {
    if img.spatial() != (mask.height, mask.width) {
        return Err(GuidanceError::ShapeMismatch(format!(
            "image {:?} vs mask {}x{}",
            img.shape, mask.width, mask.height
        )));
    }
    Ok(())
}

/// Whether element `i` of a tensor with the mask's spatial size is masked.
#[inline]
fn masked(mask: &PixelMask, i: usize) -> bool {
    mask.data[i % mask.data.len()]
}

/// Paints masked pixels white (1.0) in every channel.
pub fn apply_white_mask(img: &Tensor, mask: &PixelMask) -> Result<Tensor, GuidanceError> {
    check_mask(img, mask)?;
    let data = img.data.iter().enumerate().map(|(i, &v)| if masked(mask, i) { 1.0 } else { v }).collect();
    img.with_data(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Squared L2 norm.
    #[default]
    Sum,
    /// Squared L2 norm divided by the element count. Equivalent to `Sum` with
    /// the scale divided by the element count.
    Mean,
}

/// `s * ||img - mask(img)||^2`.
pub fn white_loss(decoded: &Tensor, mask: &PixelMask, s: f64) -> Result<f64, GuidanceError> {
    white_loss_with(decoded, mask, s, Reduction::Sum)
}

pub fn white_loss_with(decoded: &Tensor, mask: &PixelMask, s: f64, reduction: Reduction) -> Result<f64, GuidanceError> {
    let whitened = apply_white_mask(decoded, mask)?;
    let sq: f64 = decoded.data.iter().zip(&whitened.data).map(|(a, b)| (a - b) * (a - b)).sum();
    let loss = match reduction {
        Reduction::Sum => s * sq,
        Reduction::Mean => s * sq / decoded.len() as f64,
    };
    if !loss.is_finite() {
        return Err(GuidanceError::NonFinite("white loss"));
    }
    Ok(loss)
}

fn loss_at<P: Predictor + ?Sized, D: LatentMap + ?Sized>(
    x_t: &Tensor,
    t: usize,
    predictor: &P,
    decoder: &D,
    mask: &PixelMask,
    s: f64,
) -> Result<f64, GuidanceError> {
    let decoded = decoder.forward(&predictor.predict(x_t, t)?)?;
    white_loss(&decoded, mask, s)
}

/// Gradient of the white loss with respect to the noisy latent `x_t`.
pub fn white_loss_grad<P: Predictor + ?Sized, D: LatentMap + ?Sized>(
    x_t: &Tensor,
    t: usize,
    predictor: &P,
    decoder: &D,
    mask: &PixelMask,
    s: f64,
) -> Result<Tensor, GuidanceError> {
    let x0 = predictor.predict(x_t, t)?;
    let decoded = decoder.forward(&x0)?;
    check_mask(&decoded, mask)?;

    let upstream: Vec<f64> = decoded
        .data
        .iter()
        .enumerate()
        .map(|(i, &v)| if masked(mask, i) { 2.0 * s * (v - 1.0) } else { 0.0 })
        .collect();
    let upstream = decoded.with_data(upstream)?;

    let analytic = decoder
        .backward(&x0, &upstream)
        .map(|g| g.and_then(|g| predictor.backward(x_t, t, &g).transpose()));
    let grad = match analytic {
        Some(Ok(Some(g))) => g,
        Some(Err(e)) => return Err(e),
        _ => finite_difference_grad(x_t, t, predictor, decoder, mask, s)?,
    };
    if grad.shape != x_t.shape {
        return Err(GuidanceError::ShapeMismatch(format!(
            "gradient {:?} vs latent {:?}",
            grad.shape, x_t.shape
        )));
    }
    Ok(grad)
}

/// Central differences with step [`FD_STEP`] over every latent coordinate.
pub fn finite_difference_grad<P: Predictor + ?Sized, D: LatentMap + ?Sized>(
    x_t: &Tensor,
    t: usize,
    predictor: &P,
    decoder: &D,
    mask: &PixelMask,
    s: f64,
) -> Result<Tensor, GuidanceError> {
    let mut probe = x_t.clone();
    let mut grad = Vec::with_capacity(x_t.len());
    for i in 0..x_t.len() {
        let orig = probe.data[i];
        probe.data[i] = orig + FD_STEP;
        let plus = loss_at(&probe, t, predictor, decoder, mask, s)?;
        probe.data[i] = orig - FD_STEP;
        let minus = loss_at(&probe, t, predictor, decoder, mask, s)?;
        probe.data[i] = orig;
        grad.push((plus - minus) / (2.0 * FD_STEP));
    }
    x_t.with_data(grad)
}

/// Latent, step index, noise schedule and loss scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceState {
    pub x_t: Tensor,
    pub t: usize,
    /// Cumulative products, non-increasing in `t`.
    pub alpha_bar: Vec<f64>,
    pub s: f64,
}

impl GuidanceState {
    /// Validates the schedule (values in (0, 1], non-increasing) and scale.
    pub fn new(x_t: Tensor, t: usize, alpha_bar: Vec<f64>, s: f64) -> Result<Self, GuidanceError> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(GuidanceError::InvalidConfig(format!("scale must be finite and >= 0, got {s}")));
        }
        if t >= alpha_bar.len() {
            return Err(GuidanceError::InvalidConfig(format!(
                "step {t} outside a schedule of {} values",
                alpha_bar.len()
            )));
        }
        if let Some(i) = alpha_bar.iter().position(|&a| a == 0.0) {
            return Err(GuidanceError::DivisionByZero { t: i });
        }
        if alpha_bar.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(GuidanceError::InvalidConfig("alpha_bar values must lie in (0, 1]".into()));
        }
        if alpha_bar.windows(2).any(|w| w[1] > w[0]) {
            return Err(GuidanceError::InvalidConfig("alpha_bar must be non-increasing".into()));
        }
        Ok(Self { x_t, t, alpha_bar, s })
    }

    /// `(1 - alpha_bar_t) / alpha_bar_t`.
    pub fn step_coefficient(&self) -> Result<f64, GuidanceError> {
        let a = *self.alpha_bar.get(self.t).ok_or_else(|| {
            GuidanceError::InvalidConfig(format!("step {} outside the schedule", self.t))
        })?;
        if a == 0.0 {
            return Err(GuidanceError::DivisionByZero { t: self.t });
        }
        Ok((1.0 - a) / a)
    }
}

/// Applies the masked latent correction; unmasked coordinates are copied bit for bit.
pub fn latent_update(state: &GuidanceState, grad: &Tensor, latent_mask: &LatentMask) -> Result<GuidanceState, GuidanceError> {
    if grad.shape != state.x_t.shape {
        return Err(GuidanceError::ShapeMismatch(format!(
            "gradient {:?} vs latent {:?}",
            grad.shape, state.x_t.shape
        )));
    }
    if state.x_t.spatial() != (latent_mask.height, latent_mask.width) {
        return Err(GuidanceError::ShapeMismatch(format!(
            "latent {:?} vs latent mask {}x{}",
            state.x_t.shape, latent_mask.width, latent_mask.height
        )));
    }
    let coef = state.step_coefficient()?;
    let cells = latent_mask.data.len();
    let data = state
        .x_t
        .data
        .iter()
        .zip(&grad.data)
        .enumerate()
        .map(|(i, (&x, &g))| if latent_mask.data[i % cells] { x - g * coef } else { x })
        .collect();
    Ok(GuidanceState { x_t: state.x_t.with_data(data)?, ..state.clone() })
}

/// Block-averages the mask down to latent resolution; a cell is set when at
/// least half of its pixels are.
pub fn downscale_mask(mask: &PixelMask, latent_w: usize, latent_h: usize) -> Result<LatentMask, GuidanceError> {
    if latent_w == 0 || latent_h == 0 || mask.width % latent_w != 0 || mask.height % latent_h != 0 {
        return Err(GuidanceError::ShapeMismatch(format!(
            "mask {}x{} is not an integer multiple of latent {latent_w}x{latent_h}",
            mask.width, mask.height
        )));
    }
    let (bw, bh) = (mask.width / latent_w, mask.height / latent_h);
    let mut data = Vec::with_capacity(latent_w * latent_h);
    for ly in 0..latent_h {
        for lx in 0..latent_w {
            let set = (ly * bh..(ly + 1) * bh)
                .flat_map(|y| (lx * bw..(lx + 1) * bw).map(move |x| (x, y)))
                .filter(|&(x, y)| mask.data[y * mask.width + x])
                .count();
            data.push(2 * set >= bw * bh);
        }
    }
    Ok(LatentMask { width: latent_w, height: latent_h, data })
}

/// Mean decoded value over the masked pixels.
fn masked_mean(img: &Tensor, mask: &PixelMask) -> f64 {
    let (sum, n) = img
        .data
        .iter()
        .enumerate()
        .filter(|&(i, _)| masked(mask, i))
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Runs `steps` guided updates with identity predictor and decoder, starting
/// from `initial` at schedule index `t`. Returns the masked-region mean before
/// the first step and after each step (`steps + 1` values).
pub fn guided_descent_demo(
    initial: &Tensor,
    mask: &PixelMask,
    s: f64,
    alpha_bar: &[f64],
    t: usize,
    steps: usize,
) -> Result<Vec<f64>, GuidanceError> {
    if steps == 0 {
        return Err(GuidanceError::InvalidConfig("at least one step is required".into()));
    }
    check_mask(initial, mask)?;
    let latent_mask = downscale_mask(mask, mask.width, mask.height)?;
    let mut state = GuidanceState::new(initial.clone(), t, alpha_bar.to_vec(), s)?;
    let mut trajectory = vec![masked_mean(&state.x_t, mask)];
    for _ in 0..steps {
        let grad = white_loss_grad(&state.x_t, state.t, &Identity, &Identity, mask, state.s)?;
        state = latent_update(&state, &grad, &latent_mask)?;
        trajectory.push(masked_mean(&state.x_t, mask));
    }
    Ok(trajectory)
}
