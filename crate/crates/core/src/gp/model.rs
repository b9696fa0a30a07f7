use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::GpError;
use crate::kernels::{CrossGram, GramEngine, Input, KernelSpec};
use crate::trees::SymbolTable;

/// What to do when `K + σ_n² I` fails to factorize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterPolicy {
    /// Retry with `1e-8·mean(diag K)`, growing ×10 up to `1e-2·mean(diag K)`.
    #[default]
    Escalate,
    /// Fail on the first factorization error.
    None,
}

const JITTER_START: f64 = 1e-8;
const JITTER_LIMIT: f64 = 1e-2;

/// Training data bound to a kernel. Hyperparameters are supplied per fit.
#[derive(Clone)]
pub struct GpModel {
    engine: GramEngine,
    targets: Vec<f64>,
    jitter: JitterPolicy,
    center: bool,
}

/// Log marginal likelihood and its three parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lml {
    pub total: f64,
    pub data_fit: f64,
    pub complexity: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// A factorized model at fixed hyperparameters. Immutable.
#[derive(Clone)]
pub struct FittedGp {
    engine: GramEngine,
    theta: Vec<f64>,
    noise: f64,
    jitter: f64,
    y_mean: f64,
    centered: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    a: DVector<f64>,
    dk: Option<Vec<DMatrix<f64>>>,
}

impl GpModel {
    pub fn new(spec: &KernelSpec, inputs: Vec<Input>, targets: Vec<f64>, table: &SymbolTable) -> Result<Self, GpError> {
        if inputs.len() != targets.len() {
            return Err(GpError::TargetCount { expected: inputs.len(), got: targets.len() });
        }
        Self::from_engine(GramEngine::new(spec, inputs, table)?, targets)
    }

    pub fn from_engine(engine: GramEngine, targets: Vec<f64>) -> Result<Self, GpError> {
        if engine.len() != targets.len() {
            return Err(GpError::TargetCount { expected: engine.len(), got: targets.len() });
        }
        if targets.is_empty() {
            return Err(GpError::NoTrainingData);
        }
        Ok(GpModel { engine, targets, jitter: JitterPolicy::default(), center: true })
    }

    pub fn with_jitter_policy(mut self, policy: JitterPolicy) -> Self {
        self.jitter = policy;
        self
    }

    /// Whether targets are mean-centered before fitting (on by default).
    pub fn with_centering(mut self, center: bool) -> Self {
        self.center = center;
        self
    }

    pub fn engine(&self) -> &GramEngine {
        &self.engine
    }

    pub fn spec(&self) -> &KernelSpec {
        self.engine.spec()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.engine.param_count()
    }

    /// Model over a subset of the training rows, sharing compiled kernel plans.
    pub fn subset(&self, rows: &[usize]) -> Result<GpModel, GpError> {
        let targets = rows.iter().map(|&r| self.targets[r]).collect();
        Ok(GpModel::from_engine(self.engine.view(rows), targets)?.with_jitter_policy(self.jitter).with_centering(self.center))
    }

    pub fn fit(&self, theta: &[f64], noise: f64) -> Result<FittedGp, GpError> {
        let k = self.engine.gram(theta)?;
        self.factorize(theta, noise, k, None)
    }

    /// Fits and keeps `∂K/∂θ` so [`FittedGp::lml_gradient`] needs no second
    /// Gram evaluation.
    pub fn fit_with_gradients(&self, theta: &[f64], noise: f64) -> Result<FittedGp, GpError> {
        let g = self.engine.gram_with_grads(theta)?;
        self.factorize(theta, noise, g.k, Some(g.dk))
    }

    fn factorize(
        &self,
        theta: &[f64],
        noise: f64,
        k: DMatrix<f64>,
        dk: Option<Vec<DMatrix<f64>>>,
    ) -> Result<FittedGp, GpError> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(GpError::InvalidNoise(noise));
        }
        let n = self.targets.len();
        let y_mean = if self.center { self.targets.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let centered = DVector::from_iterator(n, self.targets.iter().map(|y| y - y_mean));
        let (chol, jitter) = cholesky_with_jitter(k, noise, self.jitter)?;
        let a = chol.solve(&centered);
        Ok(FittedGp {
            engine: self.engine.clone(),
            theta: theta.to_vec(),
            noise,
            jitter,
            y_mean,
            centered,
            chol,
            a,
            dk,
        })
    }
}

fn try_cholesky(g: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(g)?;
    let l = chol.l_dirty();
    if (0..l.nrows()).all(|i| l[(i, i)] > 0.0 && l[(i, i)].is_finite()) {
        Some(chol)
    } else {
        None
    }
}

/// Factorizes `K + σ_n² I`, adding jitter per `policy` when needed. Returns
/// the factor and the jitter used.
pub fn cholesky_with_jitter(k: DMatrix<f64>, noise: f64, policy: JitterPolicy) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    let n = k.nrows();
    let add_diag = |m: &DMatrix<f64>, d: f64| {
        let mut g = m.clone();
        for i in 0..n {
            g[(i, i)] += d;
        }
        g
    };
    if let Some(c) = try_cholesky(add_diag(&k, noise)) {
        return Ok((c, 0.0));
    }
    if policy == JitterPolicy::None {
        return Err(GpError::NotPositiveDefinite { jitter: 0.0 });
    }
    let scale = {
        let m = k.diagonal().mean();
        if m > 0.0 && m.is_finite() {
            m
        } else {
            1.0
        }
    };
    let mut jitter = JITTER_START * scale;
    loop {
        if let Some(c) = try_cholesky(add_diag(&k, noise + jitter)) {
            return Ok((c, jitter));
        }
        if jitter >= JITTER_LIMIT * scale * (1.0 - 1e-12) {
            return Err(GpError::NotPositiveDefinite { jitter });
        }
        jitter *= 10.0;
    }
}

impl FittedGp {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Diagonal increment added on top of the noise to factorize.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn target_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn engine(&self) -> &GramEngine {
        &self.engine
    }

    /// Lower-triangular factor of `K + (σ_n² + jitter) I`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `(K + (σ_n² + jitter) I)⁻¹ (y − μ_y)`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn log_marginal_likelihood(&self) -> Lml {
        let n = self.a.len() as f64;
        let data_fit = -0.5 * self.centered.dot(&self.a);
        let l = self.chol.l_dirty();
        let complexity = -(0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        let constant = -0.5 * n * (2.0 * std::f64::consts::PI).ln();
        Lml { total: data_fit + complexity + constant, data_fit, complexity, constant }
    }

    /// Gradient over `θ` followed by the noise variance.
    pub fn lml_gradient(&self) -> Result<Vec<f64>, GpError> {
        let computed;
        let dk = match &self.dk {
            Some(d) => d,
            None => {
                computed = self.engine.gram_with_grads(&self.theta)?.dk;
                &computed
            }
        };
        let mut w = self.chol.inverse();
        w.neg_mut();
        w.ger(1.0, &self.a, &self.a, 1.0);
        let mut grad: Vec<f64> = dk.iter().map(|d| 0.5 * w.dot(d)).collect();
        grad.push(0.5 * w.trace());
        Ok(grad)
    }

    /// Predictions for new inputs built from the training symbol table.
    pub fn predict(&self, inputs: &[Input]) -> Result<Prediction, GpError> {
        let cross = self.engine.cross_inputs(inputs, &self.theta)?;
        Ok(self.predict_cross(cross))
    }

    /// Predictions for rows of another view over the same compiled inputs.
    pub fn predict_view(&self, rows: &GramEngine) -> Result<Prediction, GpError> {
        let cross = self.engine.cross_view(rows, &self.theta)?;
        Ok(self.predict_cross(cross))
    }

    fn predict_cross(&self, cross: CrossGram) -> Prediction {
        let mean: Vec<f64> = (&cross.k * &self.a).iter().map(|m| m + self.y_mean).collect();
        let v = self.chol.l_dirty().solve_lower_triangular(&cross.k.transpose()).expect("factor has a positive diagonal");
        let variance = (0..cross.k.nrows()).map(|i| (cross.diag[i] - v.column(i).norm_squared()).max(0.0)).collect();
        Prediction { mean, variance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::TyingScheme;
    use crate::trees::parse_bracketed;

    fn single_tree_model(y: f64) -> GpModel {
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        GpModel::new(&KernelSpec::sstk(), vec![Input::tree(tree)], vec![y], &t).unwrap()
    }

    #[test]
    fn one_point_factor() {
        let fit = single_tree_model(0.0).fit(&[0.5, 1.0], 1.0).unwrap();
        assert_eq!(fit.jitter(), 0.0);
        assert!((fit.cholesky_factor()[(0, 0)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_point_lml_and_noise_gradient() {
        for y in [0.0, 2.0] {
            let fit = single_tree_model(y).fit(&[0.5, 1.0], 1.0).unwrap();
            let lml = fit.log_marginal_likelihood();
            let expected = -0.5 * 2f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
            assert!((lml.total - expected).abs() < 1e-14);
            assert!((lml.total + 1.26551).abs() < 1e-5);
            assert_eq!(lml.data_fit, 0.0);
            let g = fit.lml_gradient().unwrap();
            assert_eq!(g[0], 0.0);
            assert_eq!(g[1], 0.0);
            assert!((g[2] + 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicated_inputs_without_noise() {
        let mut t = SymbolTable::new();
        let a = parse_bracketed("(S (A a) (B b))", &mut t).unwrap();
        let inputs = vec![Input::tree(a.clone()), Input::tree(a)];
        let model = GpModel::new(&KernelSpec::sstk(), inputs, vec![1.0, 2.0], &t).unwrap();
        let strict = model.clone().with_jitter_policy(JitterPolicy::None);
        assert!(matches!(strict.fit(&[0.5, 1.0], 0.0), Err(GpError::NotPositiveDefinite { .. })));
        let fit = model.fit(&[0.5, 1.0], 0.0).unwrap();
        assert!(fit.jitter() > 0.0 && fit.jitter() <= 1e-2);
    }

    #[test]
    fn prior_reversion_for_unrelated_tree() {
        let mut t = SymbolTable::new();
        let train = vec![
            Input::tree(parse_bracketed("(S (A a) (B b))", &mut t).unwrap()),
            Input::tree(parse_bracketed("(S (A a) (B c))", &mut t).unwrap()),
        ];
        let spec = KernelSpec::tree(TyingScheme::tied()).normalized(false);
        let model = GpModel::new(&spec, train, vec![1.0, 3.0], &t).unwrap();
        let fit = model.fit(&[0.5, 1.0], 0.1).unwrap();
        let far = Input::tree(parse_bracketed("(X (Y y))", &mut t).unwrap());
        let p = fit.predict(&[far]).unwrap();
        assert_eq!(p.mean, vec![2.0]);
        // Unnormalized self-kernel: λ + λ(α + λ) = 1.25.
        assert_eq!(p.variance, vec![1.25]);
    }

    #[test]
    fn rejects_bad_noise_and_counts() {
        let model = single_tree_model(0.0);
        assert!(matches!(model.fit(&[0.5, 1.0], -1.0), Err(GpError::InvalidNoise(_))));
        let mut t = SymbolTable::new();
        let tree = parse_bracketed("(A a)", &mut t).unwrap();
        assert!(matches!(
            GpModel::new(&KernelSpec::sstk(), vec![Input::tree(tree)], vec![], &t),
            Err(GpError::TargetCount { expected: 1, got: 0 })
        ));
    }
}
