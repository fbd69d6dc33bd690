use crate::coupling::{
    contractivity, sticky_kernel, sync_kernel, Branch, CoupledState, CouplingKind, PairEval,
    StepScratch,
};
use crate::dynamics::{advance, ensure_finite, ModelSpec, SimParams};
use crate::error::{Error, Result};
use crate::noise::NoiseSource;

/// A trajectory of one coupling kind, with drifts cached at the current state.
///
/// `Standard` only moves `x`; `y` is left at its initial value.
pub struct CoupledChain<'a> {
    kind: CouplingKind,
    model: &'a ModelSpec,
    params: SimParams,
    noise: NoiseSource,
    x: Vec<f64>,
    y: Vec<f64>,
    x_next: Vec<f64>,
    y_next: Vec<f64>,
    bx: Vec<f64>,
    fx: Vec<f64>,
    by: Vec<f64>,
    g: Vec<f64>,
    scratch: StepScratch,
    met: bool,
    steps: u64,
    last_branch: Option<Branch>,
    last_uniform: Option<f64>,
}

impl<'a> CoupledChain<'a> {
    pub fn new(
        kind: CouplingKind,
        model: &'a ModelSpec,
        params: SimParams,
        start: CoupledState,
        noise: NoiseSource,
    ) -> Result<Self> {
        let d = model.dim;
        if start.x.len() != d || start.y.len() != d {
            return Err(Error::param(
                "initial state does not match the model dimension",
            ));
        }
        let mut chain = CoupledChain {
            kind,
            model,
            params,
            noise,
            met: start.x == start.y,
            x: start.x,
            y: start.y,
            x_next: vec![0.0; d],
            y_next: vec![0.0; d],
            bx: vec![0.0; d],
            fx: vec![0.0; d],
            by: vec![0.0; d],
            g: vec![0.0; d],
            scratch: StepScratch::new(d),
            steps: 0,
            last_branch: None,
            last_uniform: None,
        };
        chain.refresh_x()?;
        chain.refresh_y(false)?;
        Ok(chain)
    }

    fn forced(&self) -> bool {
        self.params.eta != 0.0
    }

    fn refresh_x(&mut self) -> Result<()> {
        self.model.drift_into(&self.x, &mut self.bx)?;
        if self.forced() {
            self.model.forcing.eval_into(&self.x, &mut self.fx);
        }
        Ok(())
    }

    fn refresh_y(&mut self, glued: bool) -> Result<()> {
        if !self.kind.is_coupled() {
            return Ok(());
        }
        if glued {
            self.by.copy_from_slice(&self.bx);
            Ok(())
        } else {
            self.model.drift_into(&self.y, &mut self.by)
        }
    }

    /// Advances both chains by one step.
    pub fn step(&mut self) -> Result<()> {
        self.steps += 1;
        self.advance_once().map_err(|e| e.at_step(self.steps))
    }

    fn advance_once(&mut self) -> Result<()> {
        self.noise.fill_gaussian(&mut self.g);
        let p = self.params;
        let ev = PairEval {
            bx: &self.bx,
            fx: self.forced().then_some(&self.fx[..]),
            by: &self.by,
        };
        let branch = match self.kind {
            CouplingKind::Standard => {
                advance(
                    &self.x,
                    ev.bx,
                    ev.fx,
                    p.eta,
                    p.dt,
                    p.noise_scale(),
                    &self.g,
                    &mut self.x_next,
                );
                None
            }
            CouplingKind::Synchronous => {
                sync_kernel(
                    &self.x,
                    &self.y,
                    &ev,
                    &self.g,
                    &p,
                    &mut self.x_next,
                    &mut self.y_next,
                );
                Some(Branch::Synchronous)
            }
            CouplingKind::Sticky => {
                let u = self.noise.uniform();
                self.last_uniform = Some(u);
                let (_, b) = sticky_kernel(
                    &self.x,
                    &self.y,
                    &ev,
                    &self.g,
                    u,
                    &p,
                    &mut self.scratch,
                    &mut self.x_next,
                    &mut self.y_next,
                );
                Some(b)
            }
            CouplingKind::Hybrid => {
                let u = self.noise.uniform();
                self.last_uniform = Some(u);
                if self.met || contractivity(&self.x, &self.y, &ev, p.eta) < 0.0 {
                    self.scratch.e.fill(0.0);
                    sync_kernel(
                        &self.x,
                        &self.y,
                        &ev,
                        &self.g,
                        &p,
                        &mut self.x_next,
                        &mut self.y_next,
                    );
                    Some(Branch::Synchronous)
                } else {
                    let (_, b) = sticky_kernel(
                        &self.x,
                        &self.y,
                        &ev,
                        &self.g,
                        u,
                        &p,
                        &mut self.scratch,
                        &mut self.x_next,
                        &mut self.y_next,
                    );
                    Some(b)
                }
            }
        };
        std::mem::swap(&mut self.x, &mut self.x_next);
        ensure_finite(&self.x, "perturbed state")?;
        self.refresh_x()?;
        if self.kind.is_coupled() {
            std::mem::swap(&mut self.y, &mut self.y_next);
            ensure_finite(&self.y, "reference state")?;
            self.met = self.x == self.y;
            self.refresh_y(self.met)?;
        }
        self.last_branch = match branch {
            Some(Branch::Synchronous) if self.met => Some(Branch::Merged),
            b => b,
        };
        Ok(())
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn drift_x(&self) -> &[f64] {
        &self.bx
    }

    pub fn drift_y(&self) -> &[f64] {
        &self.by
    }

    /// The Gaussian increment used by the last step.
    pub fn last_increment(&self) -> &[f64] {
        &self.g
    }

    /// `e_k` computed by the last sticky-kernel step; zero after a synchronous one.
    pub fn last_direction(&self) -> &[f64] {
        &self.scratch.e
    }

    /// The merge uniform drawn by the last step (sticky and hybrid only).
    pub fn last_uniform(&self) -> Option<f64> {
        self.last_uniform
    }

    pub fn last_branch(&self) -> Option<Branch> {
        self.last_branch
    }

    pub fn met(&self) -> bool {
        self.met
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn state(&self) -> CoupledState {
        CoupledState::new(self.x.clone(), self.y.clone())
    }
}
