// Monte Carlo sanity checks at the reference setting; slower than the unit
// suites (a few minutes single-threaded).
#include <doctest.h>

#include "otfs/sim.hpp"

using namespace otfs;

TEST_CASE("linear detectors improve with SNR and BPIC beats MMSE") {
  SimConfig cfg;
  cfg.detectors = {Detector::Mmse, Detector::MmseBpic};
  cfg.snr_db = {5.0, 10.0, 15.0, 20.0};
  cfg.frames = 20000;
  cfg.seed = 2024;
  const SweepResult s = run_sweep(cfg);
  for (std::size_t i = 1; i < cfg.snr_db.size(); ++i) {
    const SerPoint* lo = s.find(Detector::Mmse, cfg.snr_db[i - 1]);
    const SerPoint* hi = s.find(Detector::Mmse, cfg.snr_db[i]);
    INFO("MMSE at " << cfg.snr_db[i - 1] << " vs " << cfg.snr_db[i] << " dB");
    CHECK(hi->ci_low <= lo->ci_high);
    CHECK(hi->ser <= lo->ser);
  }
  const SerPoint* mmse = s.find(Detector::Mmse, 15.0);
  const SerPoint* bpic = s.find(Detector::MmseBpic, 15.0);
  CHECK(bpic->ci_high < mmse->ci_low);
}
