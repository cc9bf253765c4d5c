use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub tick: u64,
    pub variable: String,
    pub value: f64,
}

/// A schedule of environment inputs and the last tick to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub max_ticks: u64,
    #[serde(default)]
    pub schedule: Vec<Injection>,
}

impl Scenario {
    pub fn empty(name: impl Into<String>, max_ticks: u64) -> Self {
        Self {
            name: name.into(),
            max_ticks,
            schedule: Vec::new(),
        }
    }

    pub fn then(mut self, tick: u64, variable: impl Into<String>, value: f64) -> Self {
        self.schedule.push(Injection {
            tick,
            variable: variable.into(),
            value,
        });
        self
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| e.to_string())?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schedule.windows(2).any(|w| w[0].tick > w[1].tick) {
            return Err(format!("scenario `{}`: schedule not sorted by tick", self.name));
        }
        if let Some(last) = self.schedule.last() {
            if last.tick > self.max_ticks {
                return Err(format!(
                    "scenario `{}`: injection at tick {} after max_ticks {}",
                    self.name, last.tick, self.max_ticks
                ));
            }
        }
        if let Some(bad) = self.schedule.iter().find(|i| !i.value.is_finite()) {
            return Err(format!("scenario `{}`: non-finite value for `{}`", self.name, bad.variable));
        }
        Ok(())
    }
}
