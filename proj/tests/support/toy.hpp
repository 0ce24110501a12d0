#pragma once

#include "etmpc/closed_loop.hpp"
#include "etmpc/config.hpp"
#include "etmpc/dataset.hpp"
#include "etmpc/gp.hpp"
#include "etmpc/plants.hpp"
#include "etmpc/symbolic.hpp"

namespace etmpc::testing {

// Shared small 1-D fixture: the toy preset's plant, initial dataset, fitted
// model, and completed safe-set synthesis. Built once per process.
struct ToyFixture {
  RunConfig config;
  LoopConfig loop;
  Plant plant;
  Dataset data;
  GpModel model;
  SafeSynthesis synthesis;
};

const ToyFixture& toy_fixture();

}  // namespace etmpc::testing
