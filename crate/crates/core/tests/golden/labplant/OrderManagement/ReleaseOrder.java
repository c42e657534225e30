// Skill template for role whitebox function OrderManagement/OM-WBFReleaseOrder.
// Generated by skillforge. Implement the state methods the skill needs;
// unneeded ones may stay empty or be removed.

@Skill(commType = "webService", moduleName = "OrderManagement", description = "Releases a customer order and provides its material and processing specification")
public class ReleaseOrder {

    @SkillParameter(name = "orderId")
    private String orderId;

    @SkillOutput(name = "material")
    private String material;

    @SkillOutput(name = "processingSpec")
    private String processingSpec;

    @StateMachine
    private SkillStateMachine stateMachine;

    @Starting
    public void onStarting() {
        // TODO implement
    }

    @Execute
    public void onExecute() {
        // TODO implement
    }

    @Completing
    public void onCompleting() {
        // TODO implement
    }

    @Holding
    public void onHolding() {
        // TODO implement
    }

    @Unholding
    public void onUnholding() {
        // TODO implement
    }

    @Suspending
    public void onSuspending() {
        // TODO implement
    }

    @Unsuspending
    public void onUnsuspending() {
        // TODO implement
    }

    @Stopping
    public void onStopping() {
        // TODO implement
    }

    @Aborting
    public void onAborting() {
        // TODO implement
    }

    @Clearing
    public void onClearing() {
        // TODO implement
    }

    @Resetting
    public void onResetting() {
        // TODO implement
    }
}
