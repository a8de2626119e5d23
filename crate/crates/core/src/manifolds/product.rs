use super::point::{Ambient, Layout, Point, Tangent};
use super::{Manifold, ManifoldRef};
use crate::error::{Error, Result};
use crate::Rng;

#[derive(Clone, Debug)]
pub struct Product {
    components: Vec<ManifoldRef>,
}

impl Product {
    pub fn new(components: Vec<ManifoldRef>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[ManifoldRef] {
        &self.components
    }

    fn split<'a, T>(&self, parts: Result<&'a [T]>) -> Result<&'a [T]> {
        let parts = parts?;
        if parts.len() != self.components.len() {
            return Err(Error::dim(
                format!("{} components", self.components.len()),
                format!("{} components", parts.len()),
            ));
        }
        Ok(parts)
    }
}

impl Manifold for Product {
    fn name(&self) -> String {
        let names: Vec<String> = self.components.iter().map(|c| c.name()).collect();
        format!("Product [{}]", names.join(" x "))
    }

    fn dim(&self) -> usize {
        self.components.iter().map(|c| c.dim()).sum()
    }

    fn typical_dist(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.typical_dist().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn layout(&self) -> Layout {
        Layout::Product(self.components.iter().map(|c| c.layout()).collect())
    }

    fn second_order_retraction(&self) -> bool {
        self.components.iter().all(|c| c.second_order_retraction())
    }

    fn supports_ehess2rhess(&self) -> bool {
        self.components.iter().all(|c| c.supports_ehess2rhess())
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        let (xs, us, vs) = (
            self.split(x.components())?,
            self.split(u.components())?,
            self.split(v.components())?,
        );
        let mut acc = 0.0;
        for (i, m) in self.components.iter().enumerate() {
            acc += m.inner(&xs[i], &us[i], &vs[i])?;
        }
        Ok(acc)
    }

    fn proj(&self, x: &Point, z: &Ambient) -> Result<Tangent> {
        let (xs, zs) = (self.split(x.components())?, self.split(z.components())?);
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, m)| m.proj(&xs[i], &zs[i]))
            .collect::<Result<_>>()?;
        Ok(Tangent::Product(parts))
    }

    fn retract(&self, x: &Point, u: &Tangent, t: f64) -> Result<Point> {
        let (xs, us) = (self.split(x.components())?, self.split(u.components())?);
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, m)| m.retract(&xs[i], &us[i], t))
            .collect::<Result<_>>()?;
        Ok(Point::Product(parts))
    }

    fn egrad2rgrad(&self, x: &Point, egrad: &Ambient) -> Result<Tangent> {
        let (xs, gs) = (self.split(x.components())?, self.split(egrad.components())?);
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, m)| m.egrad2rgrad(&xs[i], &gs[i]))
            .collect::<Result<_>>()?;
        Ok(Tangent::Product(parts))
    }

    fn ehess2rhess(
        &self,
        x: &Point,
        egrad: &Ambient,
        ehess_u: &Ambient,
        u: &Tangent,
    ) -> Result<Tangent> {
        let xs = self.split(x.components())?;
        let gs = self.split(egrad.components())?;
        let hs = self.split(ehess_u.components())?;
        let us = self.split(u.components())?;
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, m)| m.ehess2rhess(&xs[i], &gs[i], &hs[i], &us[i]))
            .collect::<Result<_>>()?;
        Ok(Tangent::Product(parts))
    }

    fn rand_point(&self, rng: &mut Rng) -> Point {
        Point::Product(self.components.iter().map(|m| m.rand_point(rng)).collect())
    }

    fn rand_ambient(&self, x: &Point, rng: &mut Rng) -> Ambient {
        let xs = x.components().expect("product point");
        Ambient::Product(
            self.components
                .iter()
                .zip(xs)
                .map(|(m, xi)| m.rand_ambient(xi, rng))
                .collect(),
        )
    }

    fn to_ambient(&self, x: &Point, u: &Tangent) -> Result<Ambient> {
        let (xs, us) = (self.split(x.components())?, self.split(u.components())?);
        let parts = self
            .components
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_ambient(&xs[i], &us[i]))
            .collect::<Result<_>>()?;
        Ok(Ambient::Product(parts))
    }

    fn zero_tangent(&self, x: &Point) -> Tangent {
        let xs = x.components().expect("product point");
        Tangent::Product(
            self.components
                .iter()
                .zip(xs)
                .map(|(m, xi)| m.zero_tangent(xi))
                .collect(),
        )
    }

    fn constraint_violation(&self, x: &Point) -> Result<f64> {
        let xs = self.split(x.components())?;
        let mut worst = 0.0f64;
        for (m, xi) in self.components.iter().zip(xs) {
            worst = worst.max(m.constraint_violation(xi)?);
        }
        Ok(worst)
    }
}
