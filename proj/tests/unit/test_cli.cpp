/* Copyright 2026 The xlamr Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "xlamr/io_util.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& WorkDir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "xlamr_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string P(const std::string& name) { return (WorkDir() / name).string(); }

int Run(const std::string& args) {
  const std::string cmd = std::string(XLAMR_CLI) + " " + args + " >" + P("stdout.txt") +
                          " 2>" + P("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Read(const std::string& name) { return xlamr::ReadFile(P(name)); }

void Write(const std::string& name, const std::string& text) {
  xlamr::WriteFileAtomic(P(name), text);
}

const char* kSmallConfig =
    "layers = 1\nd_model = 32\nd_ff = 128\nheads = 2\n"
    "max_steps = 20\neval_every = 10\nbatch_tokens = 400\nwarmup_steps = 10\n"
    "bpe_merges = 150\nbeam_width = 2\ndecode_max_steps = 40\n"
    "toy_examples = 40\ntoy_heldout = 8\n";

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(Run("") == 1);
  CHECK(Run("frobnicate") == 1);
  CHECK(Run("gen-toy") == 1);
  CHECK(Run("evaluate --pred " + P("absent") + " --gold " + P("absent")) == 1);
  Write("bad.cfg", "d_model = 64\nwarp_speed = 9\n");
  CHECK(Run("gen-toy --config " + P("bad.cfg") + " --out " + P("x.txt")) == 1);
  CHECK(Read("stderr.txt").find("warp_speed") != std::string::npos);
  CHECK(!fs::exists(P("x.txt")));
  CHECK(Run("--help") == 0);
}

TEST_CASE("gen-toy is reproducible") {
  Write("small.cfg", kSmallConfig);
  REQUIRE(Run("gen-toy --config " + P("small.cfg") + " --seed 3 --out " + P("g1.txt")) == 0);
  REQUIRE(Run("gen-toy --config " + P("small.cfg") + " --seed 3 --out " + P("g2.txt")) == 0);
  REQUIRE(Run("gen-toy --config " + P("small.cfg") + " --seed 4 --out " + P("g3.txt")) == 0);
  CHECK(Read("g1.txt") == Read("g2.txt"));
  CHECK(Read("g1.txt") != Read("g3.txt"));
}

TEST_CASE("data errors exit with 2 and leave no output") {
  Write("a.txt", "# ::id a\n# ::snt x\n(r / rain-01)\n");
  Write("b.txt", "# ::id b\n# ::snt x\n(r / rain-01)\n");
  CHECK(Run("evaluate --pred " + P("a.txt") + " --gold " + P("b.txt") + " --out " + P("r.txt")) == 2);
  CHECK(Read("stderr.txt").find("NoOverlappingIds") != std::string::npos);
  CHECK(!fs::exists(P("r.txt")));

  Write("junk.ck", "definitely not a checkpoint");
  CHECK(Run("parse --checkpoint " + P("junk.ck") + " --in " + P("a.txt") + " --out " + P("o.txt")) == 2);
  CHECK(!fs::exists(P("o.txt")));

  Write("broken.txt", "# ::id z\n# ::snt y\n(r / rain-01\n");
  CHECK(Run("train-bpe --in " + P("broken.txt") + " --out " + P("v.txt")) == 2);
  CHECK(!fs::exists(P("v.txt")));
  CHECK(Run("synthesize --in " + P("a.txt") + " --out " + P("s.txt") + " --translator table:" +
            P("absent.tsv")) == 2);
  CHECK(Run("synthesize --in " + P("a.txt") + " --out " + P("s.txt") + " --translator babel") == 1);
}

TEST_CASE("end-to-end pipeline") {
  Write("small.cfg", kSmallConfig);
  const std::string cfg = " --config " + P("small.cfg") + " --seed 2";
  REQUIRE(Run("gen-toy" + cfg + " --out " + P("train.txt") + " --heldout-out " + P("held.txt") +
              " --lexicon-out " + P("lex.tsv")) == 0);
  REQUIRE(Run("preprocess" + cfg + " --in " + P("train.txt") + " --out " + P("seq.tsv") +
              " --wiki-out " + P("wiki.tsv")) == 0);
  CHECK(Read("seq.tsv").rfind("toy-00001\t( ", 0) == 0);

  // The toy lexicon file reproduces the generated translations.
  REQUIRE(Run("synthesize" + cfg + " --in " + P("train.txt") + " --out " + P("silver.txt") +
              " --translator lexicon:" + P("lex.tsv")) == 0);
  CHECK(Read("silver.txt") == Read("train.txt"));

  REQUIRE(Run("train-bpe" + cfg + " --in " + P("train.txt") + " --out " + P("vocab.txt")) == 0);
  REQUIRE(Run("train" + cfg + " --train " + P("train.txt") + " --dev " + P("held.txt") +
              " --vocab " + P("vocab.txt") + " --out " + P("m.ck") + " --log " + P("log.txt")) == 0);
  CHECK(!fs::exists(P("m.ck.tmp")));
  const std::string log = Read("log.txt");
  CHECK(log.rfind("1\t", 0) == 0);
  CHECK(log.find("\neval\t10\t") != std::string::npos);
  CHECK(log.find("\neval\t20\t") != std::string::npos);

  REQUIRE(Run("parse" + cfg + " --checkpoint " + P("m.ck") + " --in " + P("held.txt") +
              " --out " + P("p1.txt") + " --translator toy") == 0);
  REQUIRE(Run("parse" + cfg + " --checkpoint " + P("m.ck") + " --in " + P("held.txt") +
              " --out " + P("p2.txt") + " --translator toy") == 0);
  CHECK(Read("p1.txt") == Read("p2.txt"));
  CHECK(Read("p1.txt").rfind("# ::id toy-00041\n", 0) == 0);

  REQUIRE(Run("evaluate" + cfg + " --pred " + P("p1.txt") + " --gold " + P("held.txt") +
              " --out " + P("report.txt")) == 0);
  const std::string report = Read("report.txt");
  CHECK(report == Read("stdout.txt"));
  CHECK(report.find("\nSmatch 0.") != std::string::npos);
  CHECK(report.find("pairs 8\n") != std::string::npos);

  Write("empty.txt", "");
  REQUIRE(Run("parse" + cfg + " --checkpoint " + P("m.ck") + " --in " + P("empty.txt") +
              " --out " + P("p3.txt")) == 0);
  CHECK(Read("p3.txt").empty());

  // Resuming with a larger budget continues after step 20.
  std::string more = kSmallConfig;
  more.replace(more.find("max_steps = 20"), 14, "max_steps = 25");
  Write("more.cfg", more);
  REQUIRE(Run("train --seed 2 --config " + P("more.cfg") + " --train " + P("train.txt") +
              " --out " + P("m2.ck") + " --log " + P("log2.txt") + " --resume " + P("m.ck")) == 0);
  CHECK(Read("log2.txt").rfind("21\t", 0) == 0);
  CHECK(Run("train --seed 9 --config " + P("more.cfg") + " --train " + P("train.txt") +
            " --out " + P("m3.ck") + " --resume " + P("m.ck")) == 2);
}
