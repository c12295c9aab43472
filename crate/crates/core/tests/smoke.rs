use ccx_core::campaigns::*;

#[test]
fn smoke_all_campaigns() {
    let cfg = CampaignConfig { instances: 4, ..Default::default() };
    for prop in ["3.1", "3.2", "2.8", "3.5", "2.4", "3.4", "constants", "6.exc", "5.2", "10.1"] {
        let rep = run_campaign(prop, &cfg).unwrap();
        println!("{}", rep.render());
        println!("-- {prop}: all_pass = {}", rep.all_pass());
    }
}
