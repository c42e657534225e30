use std::sync::{Arc, Mutex};

use skillforge_core::runtime::skills::add_skill;
use skillforge_core::runtime::{simulated_plant_skills, PlantState, SkillRegistry};

/// Which simulated plant an embedded registry carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlantMode {
    Labplant,
    None,
}

/// An embedded skill registry and the plant its skills act on.
#[derive(Clone)]
pub struct Host {
    pub registry: Arc<SkillRegistry>,
    pub plant: Option<Arc<Mutex<PlantState>>>,
}

impl Host {
    /// Registry with the calculator skill, plus the lab plant skills when
    /// asked for.
    pub fn embedded(mode: PlantMode, empty_inventory: bool) -> Host {
        let registry = SkillRegistry::new();
        let (d, b) = add_skill("Calculator");
        registry.register(d, b).expect("fresh registry");
        let plant = match mode {
            PlantMode::None => None,
            PlantMode::Labplant => {
                let mut state = PlantState::lab_default();
                if empty_inventory {
                    state = state.with_empty_inventory();
                }
                let plant = Arc::new(Mutex::new(state));
                for (d, b) in simulated_plant_skills(&plant) {
                    registry.register(d, b).expect("plant skills are distinct");
                }
                Some(plant)
            }
        };
        Host { registry: Arc::new(registry), plant }
    }

    pub fn plant_snapshot(&self) -> Option<PlantState> {
        self.plant.as_ref().map(|p| p.lock().unwrap_or_else(|e| e.into_inner()).clone())
    }
}
