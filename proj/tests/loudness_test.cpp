#include <gtest/gtest.h>

#include <cmath>

#include "automix/loudness.hpp"
#include "support.hpp"

using namespace automix;
using testsupport::reference_lufs_48k;
using testsupport::sine;

TEST(KWeighting, DesignMatchesTabulated48kCoefficients) {
  const auto k = loudness::design_k_weighting(48000);
  EXPECT_NEAR(k.shelf.b0, 1.53512485958697, 1e-8);
  EXPECT_NEAR(k.shelf.b1, -2.69169618940638, 1e-8);
  EXPECT_NEAR(k.shelf.b2, 1.19839281085285, 1e-8);
  EXPECT_NEAR(k.shelf.a1, -1.69065929318241, 1e-8);
  EXPECT_NEAR(k.shelf.a2, 0.73248077421585, 1e-8);
  // The high-pass is tabulated with unnormalised numerator 1, -2, 1.
  const double g = k.highpass.b0;
  EXPECT_NEAR(k.highpass.b1 / g, -2.0, 1e-12);
  EXPECT_NEAR(k.highpass.b2 / g, 1.0, 1e-12);
  EXPECT_NEAR(k.highpass.a1, -1.99004745483398, 1e-8);
  EXPECT_NEAR(k.highpass.a2, 0.99007225036621, 1e-8);
}

TEST(KWeighting, ResponseShapeAt44k) {
  const auto k = loudness::design_k_weighting(44100);
  auto total = [&](double hz) {
    return k.shelf.magnitude_db(hz, 44100) + k.highpass.magnitude_db(hz, 44100);
  };
  EXPECT_NEAR(total(997.0), 0.691, 0.02);
  EXPECT_NEAR(total(10000.0), 4.0, 0.1);
  EXPECT_LT(total(20.0), -10.0);
}

TEST(IntegratedLoudness, FullScaleSine) {
  for (int rate : {44100, 48000}) {
    const auto r = loudness::integrated_loudness(sine(rate, 997.0, 1.0, 5.0));
    EXPECT_NEAR(r.integrated_lufs, -3.01, 0.1) << rate;
    const auto q = loudness::integrated_loudness(sine(rate, 997.0, 0.1, 5.0));
    EXPECT_NEAR(q.integrated_lufs, -23.01, 0.1) << rate;
  }
}

TEST(IntegratedLoudness, AgreesWithReferenceMeter) {
  const auto noise = testsupport::band_noise(48000, 100.0, 8000.0, -20.0, 4.0, 3);
  const auto low = testsupport::band_noise(48000, 40.0, 120.0, -26.0, 4.0, 4);
  const auto tone = sine(48000, 60.0, 0.3, 4.0);
  std::vector<double> gated(noise.samples().begin(), noise.samples().end());
  for (std::size_t i = 0; i < gated.size() / 2; ++i) gated[i] *= 0.01;  // -40 dB half
  for (const auto& clip : {noise, low, tone, AudioClip(48000, gated)}) {
    EXPECT_NEAR(loudness::integrated_loudness(clip).integrated_lufs,
                reference_lufs_48k(clip), 1e-6);
  }
}

TEST(IntegratedLoudness, RelativeGateIgnoresQuietPart) {
  const auto loud = sine(48000, 997.0, 0.1, 3.0);
  std::vector<double> x(loud.samples().begin(), loud.samples().end());
  const auto quiet = sine(48000, 997.0, 0.001, 3.0);  // -40 dB
  x.insert(x.end(), quiet.samples().begin(), quiet.samples().end());
  const auto r = loudness::integrated_loudness(AudioClip(48000, x));
  // 27 loud blocks plus three straddling blocks at 3/4, 1/2 and 1/4 power pass
  // the relative gate; the 27 quiet blocks do not.
  EXPECT_EQ(r.gated_block_count, 30u);
  EXPECT_NEAR(r.integrated_lufs, -23.01 + 10.0 * std::log10(28.5 / 30.0), 0.01);
  EXPECT_LT(r.ungated_lufs, r.integrated_lufs - 2.0);
}

TEST(IntegratedLoudness, SilenceAndShortClips) {
  const auto r = loudness::integrated_loudness(AudioClip::silence(44100, 44100));
  EXPECT_TRUE(r.silent());
  EXPECT_EQ(r.gated_block_count, 0u);
  EXPECT_THROW(loudness::integrated_loudness(AudioClip::silence(44100, 1000)),
               loudness::LoudnessError);
}

TEST(Normalize, HitsTarget) {
  const auto clip = testsupport::band_noise(44100, 200.0, 2000.0, -33.0, 3.0, 9);
  for (double target : {-24.0, -18.0}) {
    const auto n = loudness::normalize_to(clip, target);
    EXPECT_NEAR(loudness::integrated_loudness(n.clip).integrated_lufs, target, 1e-6);
    EXPECT_NEAR(testsupport::db(testsupport::rms(n.clip.samples()) /
                                testsupport::rms(clip.samples())),
                n.applied_gain_db, 1e-9);
  }
  EXPECT_THROW(loudness::normalize_to(AudioClip::silence(44100, 44100), -24.0),
               loudness::LoudnessError);
}
