#include "toy.hpp"

namespace etmpc::testing {

const ToyFixture& toy_fixture() {
  static const ToyFixture fx = [] {
    RunConfig cfg = RunConfig::preset("toy-1d");
    Plant plant = cfg.make_plant();
    Dataset data = cfg.initial_data(plant);
    LoopConfig lc = cfg.loop_config();
    GpModel model = GpModel::fit(data, lc.hp);
    SafeSynthesis syn = SafeSynthesis::run(model, lc.sym);
    return ToyFixture{cfg, lc, plant, data, std::move(model), std::move(syn)};
  }();
  return fx;
}

}  // namespace etmpc::testing
