// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// arguments, runs only the listed criterion numbers.

#include "ecasim/batch.hpp"
#include "ecasim/channel.hpp"
#include "ecasim/engine.hpp"
#include "ecasim/mac.hpp"
#include "ecasim/metrics.hpp"
#include "ecasim/scenarios.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ecasim;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string
Fmt (const char *f, ...)
{
  char buf[512];
  va_list ap;
  va_start (ap, f);
  std::vsnprintf (buf, sizeof buf, f, ap);
  va_end (ap);
  return buf;
}

engine::SimConfig
Config (const scenarios::Scenario &sc, const mac::Protocol &p, std::uint64_t seed,
        double seconds = 25.0)
{
  engine::SimConfig c;
  c.channel = sc.channel;
  c.protocol = p;
  c.seed = seed;
  c.durationS = seconds;
  return c;
}

const std::vector<std::string> kCompared{"dcf", "eca", "eca_hyst_sr"};

// ---------------------------------------------------------------------------

Outcome
PathLossOracle ()
{
  // Independent evaluation: loss = 40.05 + 20 log10(fc/5 GHz)
  // + 20 log10(min(d, 5)) + 35 log10(d/5) beyond 5 m + 17 per floor + 12 per wall.
  auto oracle = [] (double d, double fc, int z, int w) {
    const double near = std::min (d, 5.0);
    double l = 40.05 + 20.0 * std::log10 (fc / 5.0e9) + 20.0 * std::log10 (near);
    if (d > 5.0)
      {
        l += 35.0 * std::log10 (d / 5.0);
      }
    return l + 17.0 * z + 12.0 * w;
  };
  Rng rng = Rng::Derive (2024, StreamTag::Test, 1);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    {
      const double d = rng.UniformReal (0.5, 150.0);
      const double fc = rng.UniformReal (5.15e9, 5.85e9);
      const int z = static_cast<int> (rng.UniformBelow (5));
      const int w = static_cast<int> (rng.UniformBelow (10));
      channel::PathLossParams p;
      p.carrierFrequencyHz = fc;
      worst = std::max (worst, std::abs (channel::PathLoss (d, p, {w, z}) - oracle (d, fc, z, w)));
    }
  channel::PathLossParams p;
  const double ref = channel::PathLoss (10.0, p, {2, 1});
  const bool refOk = std::abs (ref - 105.97) <= 0.01;
  return {worst <= 0.01 && refOk,
          Fmt ("50 tuples, max |error| = %.2e dB; (10 m, Z=1, W=2) = %.4f dB", worst, ref)};
}

Outcome
CollisionFreeConvergence ()
{
  bool ok = true;
  std::uint64_t afterSettled = 0;
  std::uint64_t afterFirstLiteral = 0;
  double latest = 0.0;
  for (int n = 2; n <= 7; ++n)
    {
      for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
          const auto sc = scenarios::GenSingleAp (n, 5, true);
          engine::SimConfig c = Config (sc, mac::Protocol::Eca (), seed);
          c.recordAttempts = true;
          const engine::RunResult r = engine::Run (sc.topology, c);

          std::map<NodeId, bool> lastOk;
          std::set<NodeId> succeeded;
          bool settled = false;
          bool allSucceeded = false;
          std::uint64_t failsAfterSettled = 0;
          for (const engine::AttemptRecord &a : r.attempts)
            {
              if (settled && !a.success)
                {
                  ++failsAfterSettled;
                }
              if (allSucceeded && !a.success)
                {
                  ++afterFirstLiteral;
                }
              lastOk[a.node] = a.success;
              if (a.success)
                {
                  succeeded.insert (a.node);
                }
              allSucceeded = succeeded.size () == static_cast<std::size_t> (n);
              if (!settled && lastOk.size () == static_cast<std::size_t> (n))
                {
                  settled = std::all_of (lastOk.begin (), lastOk.end (),
                                         [] (const auto &kv) { return kv.second; });
                  if (settled)
                    {
                      latest = std::max (latest, a.startUs / 1e6);
                    }
                }
            }
          if (!settled || failsAfterSettled != 0)
            {
              ok = false;
              std::printf ("  N=%d seed=%llu settled=%d failures after settling=%llu\n", n,
                           static_cast<unsigned long long> (seed), settled,
                           static_cast<unsigned long long> (failsAfterSettled));
            }
          afterSettled += failsAfterSettled;
        }
    }
  return {ok, Fmt ("N=2..7 x 5 seeds: failures after all nodes' latest attempt succeeded = %llu, "
                   "latest settle at %.4f s; failures after every node's first success = %llu",
                   static_cast<unsigned long long> (afterSettled), latest,
                   static_cast<unsigned long long> (afterFirstLiteral))};
}

Outcome
SingleNodeCycle ()
{
  const auto sc = scenarios::GenSingleAp (1, 5, true);
  const engine::SimConfig base;
  const double tData = static_cast<double> (engine::FrameDuration (1470, 1, base));
  const double tAck = static_cast<double> (engine::AckDuration (base));
  const double difs = 34, sifs = 16, slot = 9;
  const double dcfCycle = difs + (16 - 1) / 2.0 * slot + tData + sifs + tAck;
  const double ecaCycle = difs + 7 * slot + tData + sifs + tAck;
  const double dcfExpected = 1470 * 8 / dcfCycle;
  const double ecaExpected = 1470 * 8 / ecaCycle;

  double dcf = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
      const auto r = engine::Run (sc.topology, Config (sc, mac::Protocol::Dcf (), seed));
      dcf += metrics::ThroughputMbps (r.stats[1], r.simSeconds) / 5.0;
    }
  const auto re = engine::Run (sc.topology, Config (sc, mac::Protocol::Eca (), 1));
  const double eca = metrics::ThroughputMbps (re.stats[1], re.simSeconds);
  const double eDcf = std::abs (dcf / dcfExpected - 1.0);
  const double eEca = std::abs (eca / ecaExpected - 1.0);
  return {eDcf <= 0.01 && eEca <= 0.01,
          Fmt ("DCF %.3f vs %.3f Mbps (%.2f%%); ECA %.3f vs %.3f Mbps (%.3f%%)", dcf, dcfExpected,
               100 * eDcf, eca, ecaExpected, 100 * eEca)};
}

Outcome
DcfDegradation ()
{
  const std::vector<int> ns{5, 10, 20, 30};
  std::map<std::string, std::vector<double>> tput, ff;
  for (const std::string &p : kCompared)
    {
      for (int n : ns)
        {
          double t = 0, f = 0;
          for (std::uint64_t seed = 1; seed <= 5; ++seed)
            {
              const auto sc = scenarios::GenSingleAp (n, 5, true);
              const auto r = engine::Run (sc.topology, Config (sc, mac::Protocol::Parse (p), seed));
              const auto o = metrics::Aggregate (r, metrics::Grouping::Overall)[0];
              t += o.throughputMbps / 5.0;
              f += o.failureFraction / 5.0;
            }
          tput[p].push_back (t);
          ff[p].push_back (f);
        }
    }
  bool ok = true;
  for (std::size_t i = 1; i < ns.size (); ++i)
    {
      ok = ok && tput["dcf"][i] < tput["dcf"][i - 1] && ff["dcf"][i] > ff["dcf"][i - 1];
    }
  for (std::size_t i = 0; i < ns.size (); ++i)
    {
      ok = ok && tput["eca"][i] >= tput["dcf"][i];
    }
  for (std::size_t i = 2; i < ns.size (); ++i)
    {
      ok = ok && ff["eca_hyst_sr"][i] < ff["eca"][i] && ff["eca"][i] < ff["dcf"][i];
    }
  std::string d;
  for (const std::string &p : kCompared)
    {
      d += p + " S/ff:";
      for (std::size_t i = 0; i < ns.size (); ++i)
        {
          d += Fmt (" N%d=%.2f/%.3f", ns[i], tput[p][i], ff[p][i]);
        }
      d += "; ";
    }
  return {ok, d};
}

Outcome
ScenarioAStarvation ()
{
  bool ok = true;
  std::string d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
      const auto sc = scenarios::GenScenarioA (3, 4, 15, 5, true);
      const auto r = engine::Run (sc.topology, Config (sc, mac::Protocol::Dcf (), seed));
      const auto w = metrics::Aggregate (r, metrics::Grouping::PerWlan);
      ok = ok && w[1].throughputMbps < w[0].throughputMbps && w[1].throughputMbps < w[2].throughputMbps;
      d += Fmt ("seed %llu: %.2f/%.2f/%.2f; ", static_cast<unsigned long long> (seed),
                w[0].throughputMbps, w[1].throughputMbps, w[2].throughputMbps);
    }
  return {ok, "WLAN S (Mbps) edge/middle/edge " + d};
}

Outcome
ScenarioBFairness ()
{
  std::map<std::string, double> jfi, ff;
  for (const std::string &p : kCompared)
    {
      for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
          const auto sc = scenarios::GenScenarioB (10, 20, 15, 5, seed);
          const auto r = engine::Run (sc.topology, Config (sc, mac::Protocol::Parse (p), seed));
          const auto w = metrics::Aggregate (r, metrics::Grouping::PerWlan);
          double m = 0;
          for (const auto &row : w)
            {
              m += row.jfi / static_cast<double> (w.size ());
            }
          jfi[p] += m / 5.0;
          ff[p] += metrics::Aggregate (r, metrics::Grouping::Overall)[0].failureFraction / 5.0;
        }
    }
  const bool ok = jfi["eca_hyst_sr"] >= jfi["dcf"] && ff["eca_hyst_sr"] < ff["dcf"]
                  && ff["eca_hyst_sr"] < ff["eca"];
  return {ok, Fmt ("A=10 N=20, 5 seeds: mean per-WLAN JFI dcf=%.4f eca=%.4f sr=%.4f; "
                   "failure fraction dcf=%.4f eca=%.4f sr=%.4f",
                   jfi["dcf"], jfi["eca"], jfi["eca_hyst_sr"], ff["dcf"], ff["eca"],
                   ff["eca_hyst_sr"])};
}

// Brute force: a candidate schedule with period P starting at the node's own
// previous transmission would transmit P, 2P, ... slots later. Slot t (1-based
// since the own transmission) is bitmap[t-1]. Accept if every such slot up to
// the end of the current cycle was seen idle.
bool
OracleAccepts (const std::vector<std::uint8_t> &bitmap, std::uint32_t candidateBd)
{
  const std::size_t cycle = bitmap.size ();
  const std::size_t period = candidateBd + 1;
  for (std::size_t t = period; t <= cycle; t += period)
    {
      if (bitmap[t - 1])
        {
          return false;
        }
    }
  return true;
}

int
OracleChoice (const std::vector<std::uint8_t> &bitmap, int stage, const mac::Protocol &proto,
              const mac::MacParams &p)
{
  const int lowest = proto.srVariant == mac::SrVariant::Aggressive ? std::max (stage - 1, 0) : 0;
  for (int k = lowest; k < stage; ++k)
    {
      if (OracleAccepts (bitmap, mac::DeterministicBackoff (k, p)))
        {
          return k;
        }
    }
  return stage;
}

mac::BackoffState
WithBitmap (int stage, const std::vector<std::uint8_t> &bitmap, const mac::MacParams &p)
{
  mac::BackoffState s;
  s.stage = stage;
  s.deterministic = true;
  s.counter = mac::DeterministicBackoff (stage, p);
  s.stickinessLeft = p.defaultStickiness;
  mac::SrState sr;
  sr.bitmap = bitmap;
  s.sr = sr;
  return s;
}

Outcome
ScheduleResetOracle ()
{
  std::uint64_t cases = 0, mismatches = 0, revertFailures = 0;
  const std::vector<mac::Protocol> protos{mac::Protocol::EcaHystSr (),
                                          mac::Protocol::EcaHystSr (mac::SrVariant::Aggressive)};
  auto check = [&] (const std::vector<std::uint8_t> &bitmap, int stage, const mac::MacParams &p,
                    const mac::Protocol &proto, Rng &rng) {
    const mac::BackoffState before = WithBitmap (stage, bitmap, p);
    const mac::BackoffState after = mac::SrEvaluate (before, proto, p);
    const int expected = OracleChoice (bitmap, stage, proto, p);
    ++cases;
    if (after.stage != expected)
      {
        ++mismatches;
        return;
      }
    if (after.stage != stage)
      {
        // A collision on the first transmission of the new schedule must
        // restore the previous one exactly.
        mac::BackoffState s = after;
        mac::ElapseIdleSlots (s, s.counter);
        const mac::FailureResult r = mac::AfterFailure (s, proto, p, rng);
        if (r.state.stage != stage || r.state.counter != before.counter || !r.state.deterministic)
          {
            ++revertFailures;
          }
      }
  };

  Rng rng = Rng::Derive (77, StreamTag::Test, 7);
  // Exhaustive: every bitmap of each length up to 16.
  for (std::uint32_t cwMin : {2u, 16u})
    {
      mac::MacParams p;
      p.cwMin = cwMin;
      for (const mac::Protocol &proto : protos)
        {
          for (int stage = 0; stage <= p.MaxStage (); ++stage)
            {
              const std::size_t len = mac::DeterministicBackoff (stage, p) + 1;
              if (len > 16)
                {
                  break;
                }
              for (std::uint32_t bits = 0; bits < (1u << len); ++bits)
                {
                  std::vector<std::uint8_t> bitmap (len);
                  for (std::size_t i = 0; i < len; ++i)
                    {
                      bitmap[i] = (bits >> i) & 1u;
                    }
                  check (bitmap, stage, p, proto, rng);
                }
            }
        }
    }
  // Randomized: lengths 32 and 64 with sparse and dense busy patterns.
  for (std::uint32_t cwMin : {16u, 4u})
    {
      mac::MacParams p;
      p.cwMin = cwMin;
      for (const mac::Protocol &proto : protos)
        {
          for (int stage = 0; stage <= p.MaxStage (); ++stage)
            {
              const std::size_t len = mac::DeterministicBackoff (stage, p) + 1;
              if (len != 32 && len != 64)
                {
                  continue;
                }
              for (int trial = 0; trial < 20000; ++trial)
                {
                  const std::uint64_t density = 1 + rng.UniformBelow (16);
                  std::vector<std::uint8_t> bitmap (len);
                  for (auto &b : bitmap)
                    {
                      b = rng.UniformBelow (64) < density ? 1 : 0;
                    }
                  bitmap.back () = 0;
                  check (bitmap, stage, p, proto, rng);
                }
            }
        }
    }
  return {mismatches == 0 && revertFailures == 0 && cases > 0,
          Fmt ("%llu bitmaps, %llu disagreements with the sub-schedule oracle, %llu bad reverts",
               static_cast<unsigned long long> (cases), static_cast<unsigned long long> (mismatches),
               static_cast<unsigned long long> (revertFailures))};
}

Outcome
BackoffFuzz ()
{
  const mac::MacParams p;
  std::uint64_t violations = 0;
  std::string d;
  for (const char *name :
       {"dcf", "eca", "eca_hyst", "eca_hyst_sr", "eca_hyst_sr_aggr", "eca_hyst_sr_r256"})
    {
      const mac::Protocol proto = mac::Protocol::Parse (name);
      const mac::MacParams eff = proto.Effective (p);
      Rng rng = Rng::Derive (99, StreamTag::Test, static_cast<std::uint64_t> (d.size ()));
      mac::BackoffState s = mac::InitialState (proto, p, rng);
      std::uint64_t local = 0;
      auto require = [&local] (bool c) { local += c ? 0 : 1; };
      for (int ev = 0; ev < 1000000; ++ev)
        {
          require (s.counter <= mac::ContentionWindow (s.stage, eff) - 1);
          require (s.stage >= 0 && s.stage <= eff.MaxStage ());
          if (s.counter > 0)
            {
              const bool busy = rng.UniformBelow (3) == 0;
              const std::uint32_t c = s.counter;
              s = busy ? mac::OnBusySlot (s) : mac::OnIdleSlot (s);
              require (s.counter == c - 1);
              continue;
            }
          const mac::BackoffState prev = s;
          if (rng.UniformBelow (4) != 0)
            {
              s = mac::AfterSuccess (s, proto, p, rng);
              require (s.retries == 0);
              switch (proto.kind)
                {
                case mac::Protocol::Kind::Dcf:
                  require (s.stage == 0 && !s.deterministic);
                  break;
                case mac::Protocol::Kind::Eca:
                  require (s.stage == 0 && s.counter == 7 && s.deterministic);
                  break;
                case mac::Protocol::Kind::EcaHyst:
                  require (s.stage == prev.stage && s.deterministic);
                  require (s.stickinessLeft == p.defaultStickiness);
                  break;
                case mac::Protocol::Kind::EcaHystSr:
                  // Unchanged, or a Schedule Reset reduction with its extra
                  // unit of stickiness.
                  require ((s.stage == prev.stage && s.stickinessLeft == p.defaultStickiness)
                           || (s.stage < prev.stage && s.sr->justChanged
                               && s.stickinessLeft == p.defaultStickiness + 1));
                  break;
                }
              if (proto.UsesDeterministicBackoff ())
                {
                  require (s.counter == mac::DeterministicBackoff (s.stage, eff));
                }
            }
          else
            {
              const mac::FailureResult r = mac::AfterFailure (s, proto, p, rng);
              s = r.state;
              if (r.dropped)
                {
                  require (prev.retries == p.retryLimit);
                  continue;
                }
              require (s.retries == prev.retries + 1);
              int baseStage = prev.stage;
              if (prev.sr && prev.sr->justChanged && prev.sr->previousBd)
                {
                  baseStage = mac::StageForDeterministicBackoff (*prev.sr->previousBd, eff);
                }
              if (proto.UsesHysteresis () && prev.deterministic && prev.stickinessLeft > 0)
                {
                  require (s.stage == baseStage && s.deterministic);
                  require (s.stickinessLeft == prev.stickinessLeft - 1);
                  require (s.counter == mac::DeterministicBackoff (baseStage, eff));
                }
              else
                {
                  require (s.stage == std::min (baseStage + 1, eff.MaxStage ()));
                  require (!s.deterministic && s.stickinessLeft == 0);
                }
            }
        }
      violations += local;
      d += Fmt ("%s:%llu ", name, static_cast<unsigned long long> (local));
    }
  return {violations == 0, "10^6 events per protocol, violations " + d};
}

std::map<std::string, std::string>
ReadTree (const fs::path &root)
{
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator (root))
    {
      if (e.is_regular_file () && e.path ().extension () == ".csv")
        {
          std::ifstream in (e.path (), std::ios::binary);
          std::ostringstream ss;
          ss << in.rdbuf ();
          out[fs::relative (e.path (), root).generic_string ()] = ss.str ();
        }
    }
  return out;
}

Outcome
Determinism ()
{
  const fs::path root = fs::path (ECASIM_TEST_TMP) / "acceptance_determinism";
  fs::remove_all (root);
  const std::string text = "scenario = scenario_b\nn_aps = 4\nn_stations = 8\n"
                           "protocols = dcf,eca,eca_hyst_sr\niterations = 3\nduration = 2\n";
  std::istringstream in1 (text);
  batch::RunSpec s = batch::ParseSpec (in1, {{"output_dir", (root / "a").string ()}});
  const auto r1 = batch::Execute (s);
  s.outputDir = root / "b";
  s.workers = 3;
  const auto r2 = batch::Execute (s);
  const auto r3 = batch::Execute (
      batch::ParseSpecFile (root / "a" / "manifest.txt", {{"output_dir", (root / "c").string ()}}));
  const auto a = ReadTree (root / "a");
  const auto b = ReadTree (root / "b");
  const auto c = ReadTree (root / "c");
  const bool ok = r1.exitCode == 0 && r2.exitCode == 0 && r3.exitCode == 0 && !a.empty ()
                  && a == b && a == c;
  return {ok, Fmt ("%zu CSV files; rerun (3 workers) identical: %s; manifest re-run identical: %s",
                   a.size (), a == b ? "yes" : "no", a == c ? "yes" : "no")};
}

Outcome
HewChannelAllocation ()
{
  using Kind = scenarios::ChannelPolicy::Kind;
  const std::vector<std::pair<std::string, Kind>> policies{
      {"single", Kind::SingleChannel}, {"eight_ab", Kind::EightTypeAB}, {"twenty_grid", Kind::TwentyGrid}};
  BuildingGeometry g;
  g.floors = 2;
  g.roomsX = 5;
  g.roomsY = 2;
  const int seeds = 5;
  std::map<std::pair<std::string, std::string>, double> tput, ff, att;
  for (const auto &[pname, kind] : policies)
    {
      for (const std::string &proto : kCompared)
        {
          for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t> (seeds); ++seed)
            {
              auto sc = scenarios::GenHewBuilding (g, 5, seed);
              scenarios::ChannelPolicy pol;
              pol.kind = kind;
              scenarios::AllocateChannels (sc.topology, pol, seed);
              const auto r = engine::Run (sc.topology, Config (sc, mac::Protocol::Parse (proto), seed));
              const auto o = metrics::Aggregate (r, metrics::Grouping::Overall)[0];
              tput[{pname, proto}] += o.throughputMbps / seeds;
              ff[{pname, proto}] += o.failureFraction / seeds;
              att[{pname, proto}] += o.attempts / seeds;
            }
        }
    }
  bool ok = true;
  std::string d;
  for (const std::string &proto : kCompared)
    {
      ok = ok && tput[{"twenty_grid", proto}] > tput[{"eight_ab", proto}]
           && tput[{"eight_ab", proto}] > tput[{"single", proto}];
    }
  for (const auto &[pname, kind] : policies)
    {
      for (const std::string &proto : kCompared)
        {
          if (proto != "eca_hyst_sr")
            {
              ok = ok && att[{pname, "eca_hyst_sr"}] < att[{pname, proto}]
                   && ff[{pname, "eca_hyst_sr"}] < ff[{pname, proto}];
            }
          d += Fmt ("%s/%s S=%.1f ff=%.5f att=%.0f; ", pname.c_str (), proto.c_str (),
                    tput[{pname, proto}], ff[{pname, proto}], att[{pname, proto}]);
        }
    }
  return {ok, d};
}

struct Criterion
{
  int id;
  const char *name;
  std::function<Outcome ()> run;
};

} // namespace

int
main (int argc, char **argv)
{
  const std::vector<Criterion> all{
      {1, "path-loss oracle", PathLossOracle},
      {2, "collision-free convergence", CollisionFreeConvergence},
      {3, "single-node saturation cycle", SingleNodeCycle},
      {4, "DCF degradation trend", DcfDegradation},
      {5, "scenario A control starvation", ScenarioAStarvation},
      {6, "scenario B fairness", ScenarioBFairness},
      {7, "schedule reset oracle", ScheduleResetOracle},
      {8, "backoff invariant fuzzing", BackoffFuzz},
      {9, "determinism", Determinism},
      {10, "HEW channel allocation trend", HewChannelAllocation},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i)
    {
      wanted.insert (std::atoi (argv[i]));
    }
  int failed = 0;
  for (const Criterion &c : all)
    {
      if (!wanted.empty () && !wanted.count (c.id))
        {
          continue;
        }
      const auto t0 = std::chrono::steady_clock::now ();
      Outcome o;
      try
        {
          o = c.run ();
        }
      catch (const std::exception &e)
        {
          o = {false, std::string ("exception: ") + e.what ()};
        }
      const double secs = std::chrono::duration<double> (std::chrono::steady_clock::now () - t0).count ();
      std::printf ("%s criterion %2d (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                   secs, o.detail.c_str ());
      std::fflush (stdout);
      failed += o.pass ? 0 : 1;
    }
  return failed == 0 ? 0 : 1;
}
