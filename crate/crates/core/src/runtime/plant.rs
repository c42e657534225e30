//! Simulated lab plant.
//!
//! Five skills stand in for the module proxies of the lab plant and keep a
//! shared [`PlantState`] consistent: material is handed out from storage onto
//! a workpiece, a carrier moves it along the conveyor and the manufacturing
//! module processes it.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::json;

use super::registry::{SkillBehavior, SkillContext, StepOutcome};
use super::{ParameterSpec, SkillDescriptor, SkillState};
use crate::model::CommType;

pub const RAW_MATERIAL_STORAGE: &str = "RawMaterialStorage";
pub const MANUFACTURING: &str = "Manufacturing";

/// Module positions along the conveyor.
pub const POSITIONS: [&str; 6] = [RAW_MATERIAL_STORAGE, MANUFACTURING, "QualityControl", "Assembly", "LidStorage", "ProductStorage"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Workpiece {
    pub material: String,
    pub location: String,
    pub processed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Order {
    pub material: String,
    pub processing_spec: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlantState {
    pub storage_inventory: BTreeMap<String, u64>,
    pub carrier_at: String,
    pub workpieces: BTreeMap<String, Workpiece>,
    pub orders: BTreeMap<String, Order>,
}

impl PlantState {
    /// One thermometer base in storage and one open order for it.
    pub fn lab_default() -> Self {
        PlantState {
            storage_inventory: BTreeMap::from([("thermometerBase".to_owned(), 1)]),
            carrier_at: "ProductStorage".into(),
            workpieces: BTreeMap::new(),
            orders: BTreeMap::from([(
                "order-1".to_owned(),
                Order { material: "thermometerBase".into(), processing_spec: "standard".into() },
            )]),
        }
    }

    pub fn with_empty_inventory(mut self) -> Self {
        self.storage_inventory.values_mut().for_each(|c| *c = 0);
        self
    }

    pub fn processed_count(&self) -> usize {
        self.workpieces.values().filter(|w| w.processed).count()
    }

    pub fn hand_out(&mut self, material: &str) -> Result<String, String> {
        let count = self.storage_inventory.get_mut(material).filter(|c| **c > 0).ok_or_else(|| format!("OutOfStock: {material}"))?;
        *count -= 1;
        let id = format!("wp-{}", self.workpieces.len() + 1);
        let piece = Workpiece { material: material.to_owned(), location: RAW_MATERIAL_STORAGE.into(), processed: false };
        self.workpieces.insert(id.clone(), piece);
        Ok(id)
    }

    pub fn request_carrier(&mut self, target: &str) -> Result<String, String> {
        check_position(target)?;
        self.carrier_at = target.to_owned();
        Ok("carrier-1".into())
    }

    pub fn transport(&mut self, workpiece: &str, from: &str, to: &str) -> Result<(), String> {
        check_position(to)?;
        if self.carrier_at != from {
            return Err(format!("no carrier at {from}"));
        }
        let piece = self
            .workpieces
            .get_mut(workpiece)
            .filter(|w| w.location == from)
            .ok_or_else(|| format!("UnknownWorkpiece: {workpiece} at {from}"))?;
        piece.location = to.to_owned();
        self.carrier_at = to.to_owned();
        Ok(())
    }

    pub fn manufacture(&mut self, workpiece: &str) -> Result<(), String> {
        let piece = self
            .workpieces
            .get_mut(workpiece)
            .filter(|w| w.location == MANUFACTURING && !w.processed)
            .ok_or_else(|| format!("UnknownWorkpiece: {workpiece} at {MANUFACTURING}"))?;
        piece.processed = true;
        Ok(())
    }
}

fn check_position(position: &str) -> Result<(), String> {
    if POSITIONS.contains(&position) {
        Ok(())
    } else {
        Err(format!("unknown position {position}"))
    }
}

fn descriptor(module: &str, name: &str, comm: CommType, params: Vec<ParameterSpec>, outputs: &[&str], description: &str) -> SkillDescriptor {
    SkillDescriptor {
        module_name: module.into(),
        skill_name: name.into(),
        comm_type: comm,
        parameters: params,
        outputs: outputs.iter().map(|o| ParameterSpec::new(o, "string")).collect(),
        description: description.into(),
    }
}

/// Runs `body` in `Execute` with the plant locked; other acting states pass.
fn on_execute<F>(plant: &Arc<Mutex<PlantState>>, mut body: F) -> Box<dyn SkillBehavior>
where
    F: FnMut(&mut PlantState, &mut SkillContext<'_>) -> Result<(), String> + Send + 'static,
{
    let plant = Arc::clone(plant);
    Box::new(move |state: SkillState, ctx: &mut SkillContext<'_>| {
        if state == SkillState::Execute {
            let mut plant = plant.lock().unwrap_or_else(|e| e.into_inner());
            body(&mut plant, ctx)?;
        }
        Ok(StepOutcome::Done)
    })
}

/// The five lab plant skills, in process order.
pub fn simulated_plant_skills(plant: &Arc<Mutex<PlantState>>) -> Vec<(SkillDescriptor, Box<dyn SkillBehavior>)> {
    let string = |name: &str| ParameterSpec::new(name, "string");
    vec![
        (
            descriptor(
                "OrderManagement",
                "ReleaseOrder",
                CommType::WebService,
                vec![string("orderId").with_default(json!("order-1"))],
                &["material", "processingSpec"],
                "Releases an order and publishes its material and processing specification",
            ),
            on_execute(plant, |plant, ctx| {
                let id = ctx.str_parameter("orderId")?;
                let order = plant.orders.get(id).ok_or_else(|| format!("UnknownOrder: {id}"))?.clone();
                ctx.set_output("material", order.material);
                ctx.set_output("processingSpec", order.processing_spec);
                Ok(())
            }),
        ),
        (
            descriptor(
                RAW_MATERIAL_STORAGE,
                "HandOutMaterial",
                CommType::OpcUa,
                vec![string("material")],
                &["workpieceId", "pickupPosition"],
                "Hands out one raw workpiece of the requested material",
            ),
            on_execute(plant, |plant, ctx| {
                let id = plant.hand_out(ctx.str_parameter("material")?)?;
                ctx.set_output("workpieceId", id);
                ctx.set_output("pickupPosition", RAW_MATERIAL_STORAGE);
                Ok(())
            }),
        ),
        (
            descriptor(
                "Transportation",
                "RequestCarrier",
                CommType::OpcUa,
                vec![string("target")],
                &["carrierId"],
                "Requests a carrier at the target position",
            ),
            on_execute(plant, |plant, ctx| {
                let carrier = plant.request_carrier(ctx.str_parameter("target")?)?;
                ctx.set_output("carrierId", carrier);
                Ok(())
            }),
        ),
        (
            descriptor(
                "Transportation",
                "Transport",
                CommType::OpcUa,
                vec![string("workpieceId"), string("from"), string("to").with_default(json!(MANUFACTURING))],
                &["deliveredWorkpieceId"],
                "Moves a workpiece on the carrier between two positions",
            ),
            on_execute(plant, |plant, ctx| {
                let id = ctx.str_parameter("workpieceId")?;
                plant.transport(id, ctx.str_parameter("from")?, ctx.str_parameter("to")?)?;
                let id = id.to_owned();
                ctx.set_output("deliveredWorkpieceId", id);
                Ok(())
            }),
        ),
        (
            descriptor(
                MANUFACTURING,
                "Manufacture",
                CommType::OpcUa,
                vec![string("workpieceId"), string("processingSpec")],
                &["processedWorkpieceId"],
                "Processes a delivered workpiece according to the processing specification",
            ),
            on_execute(plant, |plant, ctx| {
                ctx.str_parameter("processingSpec")?;
                let id = ctx.str_parameter("workpieceId")?.to_owned();
                plant.manufacture(&id)?;
                ctx.set_output("processedWorkpieceId", id);
                Ok(())
            }),
        ),
    ]
}
