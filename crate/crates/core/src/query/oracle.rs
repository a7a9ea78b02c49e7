use rand::RngCore;

use crate::domain::Domain;

/// The hidden program, answering queries and counting how often it is asked.
#[derive(Debug)]
pub struct Oracle<'a, D: Domain> {
    domain: &'a D,
    program: &'a D::Program,
    calls: usize,
    probes: usize,
}

impl<'a, D: Domain> Oracle<'a, D> {
    pub fn new(domain: &'a D, program: &'a D::Program) -> Self {
        Oracle {
            domain,
            program,
            calls: 0,
            probes: 0,
        }
    }

    pub fn domain(&self) -> &'a D {
        self.domain
    }

    /// Answer a query that will be kept.
    pub fn answer(&mut self, x: &D::Input) -> D::Output {
        self.calls += 1;
        self.domain.respond(self.program, x)
    }

    /// Answer a query that may be discarded if the response is not evidence.
    pub fn probe(&mut self, x: &D::Input) -> D::Output {
        self.probes += 1;
        self.answer(x)
    }

    /// Draw an input of the right shape. Reads only the input signature.
    pub fn sample_input(&self, rng: &mut dyn RngCore) -> D::Input {
        self.domain.sample_input(self.program, rng)
    }

    pub fn start_signal(&self) -> (D::Input, D::Output) {
        self.domain.start_signal(self.program)
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn probes(&self) -> usize {
        self.probes
    }
}
