// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include "ajolote/ceremonies.h"
#include "analysis/observer.h"
#include "analysis/revault_library.h"
#include "analysis/tree_dsl.h"
#include "testutil.h"

#include <cmath>

using namespace covlab;

namespace {

AttackNode CostLeaf(const std::string& label, double cost, double time = 1.0, double prob = 0.5)
{
    AttackNode n = AttackNode::Leaf(label);
    n.attrs.cost = cost;
    n.attrs.time = time;
    n.attrs.prob = prob;
    return n;
}

} // namespace

TEST_CASE("gate semantics: best child, sums, products")
{
    AttackNode tree = AttackNode::Gate2(GateKind::Or);
    tree.children.push_back(CostLeaf("five", 5));
    tree.children.push_back(CostLeaf("three", 3));
    EvalResult r = EvalTree(tree, TreeQuery::MinCost);
    CHECK(r.value == 3);
    CHECK(r.scenario == std::vector<std::string>{"three"});

    AttackNode both = AttackNode::Gate2(GateKind::And);
    both.children.push_back(CostLeaf("x", 1, 2, 0.5));
    both.children.push_back(CostLeaf("y", 2, 3, 0.5));
    EvalResult prob = EvalTree(both, TreeQuery::MaxProbUnderBudget, 100);
    CHECK(prob.feasible);
    CHECK(prob.value == doctest::Approx(0.25));
    // AND time is the max; SAND time is the sum.
    CHECK(EvalTree(both, TreeQuery::MinTime).value == 3);
    AttackNode seq = both;
    seq.gate = GateKind::Sand;
    CHECK(EvalTree(seq, TreeQuery::MinTime).value == 5);
    CHECK(EvalTree(seq, TreeQuery::MinCost).value == 3);

    // Budget binds.
    AttackNode pick = AttackNode::Gate2(GateKind::Or);
    pick.children.push_back(CostLeaf("cheap", 10, 1, 0.2));
    pick.children.push_back(CostLeaf("good", 100, 1, 0.9));
    CHECK(EvalTree(pick, TreeQuery::MaxProbUnderBudget, 50).value == doctest::Approx(0.2));
    CHECK(EvalTree(pick, TreeQuery::MaxProbUnderBudget, 200).value == doctest::Approx(0.9));
    CHECK(!EvalTree(pick, TreeQuery::MaxProbUnderBudget, 5).feasible);
}

TEST_CASE("multiplicity expansion produces tagged AND copies")
{
    AttackNode leaf = CostLeaf("step", 7);
    leaf.times = "2";
    AttackNode expanded = ExpandMultiplicity(leaf);
    REQUIRE(expanded.kind == AttackNode::Kind::Gate);
    CHECK(expanded.gate == GateKind::And);
    REQUIRE(expanded.children.size() == 2);
    CHECK(expanded.children[0].label == "step#1");
    CHECK(expanded.children[1].label == "step#2");

    // X = 1 is the identity.
    AttackNode once = CostLeaf("solo", 3);
    once.times = "1";
    AttackNode same = ExpandMultiplicity(once);
    CHECK(same.kind == AttackNode::Kind::Leaf);
    CHECK(same.label == "solo");

    // min_cost of the expanded tree is X times the leaf cost, and the cutset
    // oracle agrees.
    CHECK(EvalTree(expanded, TreeQuery::MinCost).value == 14);
    std::vector<Cutset> cutsets = EnumerateCutsets(expanded);
    REQUIRE(cutsets.size() == 1);
    CHECK(cutsets[0].cost == 14);

    // Parameterized multiplicities resolve through the parameter map.
    AttackNode parm = CostLeaf("per-watchtower", 2);
    parm.times = "N";
    AttackNode three = ExpandMultiplicity(parm, {{"N", 3}});
    CHECK(CountLeaves(three) == 3);
}

TEST_CASE("cutset enumeration lists exact minimal scenarios")
{
    AttackNode tree = AttackNode::Gate2(GateKind::Or);
    tree.children.push_back(CostLeaf("a", 10));
    AttackNode pair = AttackNode::Gate2(GateKind::And);
    pair.children.push_back(CostLeaf("b", 3));
    pair.children.push_back(CostLeaf("c", 4));
    tree.children.push_back(pair);

    std::vector<Cutset> cutsets = EnumerateCutsets(tree);
    REQUIRE(cutsets.size() == 2);
    CHECK(cutsets[0].leaves == std::vector<std::string>{"a"});
    CHECK(cutsets[1].leaves == std::vector<std::string>{"b", "c"});
    CHECK(cutsets[1].cost == 7);

    // A single leaf yields one singleton cutset.
    std::vector<Cutset> single = EnumerateCutsets(CostLeaf("only", 1));
    REQUIRE(single.size() == 1);
    CHECK(single[0].leaves == std::vector<std::string>{"only"});

    // The enumeration bound guards oversized trees.
    AttackNode big = AttackNode::Gate2(GateKind::And);
    for (int i = 0; i < 30; ++i) big.children.push_back(CostLeaf("l" + std::to_string(i), 1));
    CHECK_THROWS_AS(EnumerateCutsets(big), TreeTooLarge);
}

TEST_CASE("the bundled library loads with 22 trees and enforced constraints")
{
    TreeLibrary lib = LoadRevaultLibrary();
    CHECK(lib.size() == 22);
    for (char c = 'a'; c <= 'k'; ++c) CHECK(lib.count(std::string(1, c)) == 1);
    for (char c = 'A'; c <= 'K'; ++c) CHECK(lib.count(std::string(1, c)) == 1);

    // Tree B references sub-trees h and i.
    const AttackTree& b = lib.at("B");
    std::set<std::string> refs;
    std::function<void(const AttackNode&)> walk = [&](const AttackNode& n) {
        if (n.kind == AttackNode::Kind::Ref) refs.insert(n.ref_id);
        for (const AttackNode& c : n.children) walk(c);
    };
    walk(b.root);
    CHECK(refs.count("h") == 1);
    CHECK(refs.count("i") == 1);

    // Constraint enforcement: A+B=N fails at A=4, N=3.
    ParamMap bad = DefaultRevaultParams(3);
    bad["A"] = 4;
    bad["B"] = 1;
    CHECK_THROWS_AS(Instantiate(lib, "i", bad), BadParameters);
    ParamMap good = RevaultParamsFor(lib, "i", 3);
    CHECK_NOTHROW(Instantiate(lib, "i", good));

    // Tree i at N=2 includes watchtower-compromise plus shutdown scenarios.
    ParamMap n2 = RevaultParamsFor(lib, "i", 2); // A=1, B=1
    AttackNode i2 = Instantiate(lib, "i", n2);
    bool has_shutdown = false, has_server = false;
    VisitLeaves(i2, [&](const AttackNode& leaf) {
        if (leaf.label.find("unplug the machine") != std::string::npos) has_shutdown = true;
        if (leaf.label.find("listening on the interfaces") != std::string::npos) has_server = true;
    });
    CHECK(has_shutdown);
    CHECK(has_server);

    // Unknown references are rejected.
    TreeLibrary broken;
    AttackTree t;
    t.id = "x";
    t.root = AttackNode::Ref("nowhere");
    broken.emplace("x", t);
    CHECK_THROWS_AS(Instantiate(broken, "x", {}), BadReference);
}

TEST_CASE("the tree DSL round-trips the bundled library")
{
    TreeLibrary lib = LoadRevaultLibrary();
    std::string text = SerializeTreeLibrary(lib);
    TreeLibrary reparsed = ParseTreeLibrary(text);
    CHECK(reparsed.size() == lib.size());
    CHECK(SerializeTreeLibrary(reparsed) == text);

    CHECK_THROWS_AS(ParseTreeLibrary("tree x\n  FROB\n    leaf \"a\"\n"), TreeParseError);
    CHECK_THROWS_AS(ParseTreeLibrary("leaf \"stray\"\n"), TreeParseError);
}

TEST_CASE("evaluation matches flat enumeration on the enumerable trees")
{
    TreeLibrary lib = LoadRevaultLibrary();
    for (const auto& [id, tree] : lib) {
        (void)tree;
        ParamMap params = RevaultParamsFor(lib, id, 2);
        AttackNode full = Instantiate(lib, id, params);
        if (CountLeaves(full) > 24) continue;
        for (uint64_t seed : {11ull, 22ull}) {
            AssignAttributes(full,
                             [&](const std::string& l) { return SeededAttributes(seed, l); });
            std::vector<Cutset> cutsets = EnumerateCutsets(full);
            REQUIRE(!cutsets.empty());
            double best_cost = cutsets[0].cost, best_time = cutsets[0].time;
            for (const Cutset& c : cutsets) {
                best_cost = std::min(best_cost, c.cost);
                best_time = std::min(best_time, c.time);
            }
            INFO(id << " seed " << seed);
            CHECK(EvalTree(full, TreeQuery::MinCost).value == doctest::Approx(best_cost));
            CHECK(EvalTree(full, TreeQuery::MinTime).value == doctest::Approx(best_time));
            double budget = best_cost * 2;
            double best_prob = 0;
            for (const Cutset& c : cutsets) {
                if (c.cost <= budget) best_prob = std::max(best_prob, c.prob);
            }
            CHECK(EvalTree(full, TreeQuery::MaxProbUnderBudget, budget).value ==
                  doctest::Approx(best_prob));
        }
    }
}

TEST_CASE("pruning outside an attacker profile never lowers the minimum cost")
{
    TreeLibrary lib = LoadRevaultLibrary();
    covlab::test::Rng rng(99);
    for (const std::string id : {"a", "d", "e", "g", "h", "A", "F", "J"}) {
        AttackNode full = Instantiate(lib, id, RevaultParamsFor(lib, id, 2));
        AssignAttributes(full, [&](const std::string& l) { return SeededAttributes(7, l); });
        double base = EvalTree(full, TreeQuery::MinCost).value;
        for (int trial = 0; trial < 20; ++trial) {
            uint32_t drop = rng.Range(1000);
            auto pruned = PruneLeaves(full, [&](const AttackNode& leaf) {
                // Pseudo-random capability mask keyed on the label.
                return (std::hash<std::string>{}(leaf.label) % 1000) >= drop;
            });
            if (!pruned) continue; // root infeasible: cost is effectively infinite
            double after = EvalTree(*pruned, TreeQuery::MinCost).value;
            INFO(id);
            CHECK(after >= base - 1e-9);
        }
    }
}

TEST_CASE("observer detects planted sequences with no false positives")
{
    AjoloteConfig cfg;
    cfg.timelock = 2;
    cfg.v_min = 50000;
    cfg.v_max = 400000;
    cfg.watchtowers = 2;
    cfg.w.max_withdrawals_per_window = 100;
    AjoloteWorld world(77, cfg);
    REQUIRE(RunFullSetup(world).ok);

    // Plant 4 honest sequences and 1 reject.
    covlab::test::Rng rng(13);
    int planted_honest = 0, planted_reject = 0;
    for (int s = 0; s < 5; ++s) {
        REQUIRE(Receive(world, 300000).ok);
        world.MineBlocks(1);
        REQUIRE(VaultDeposit(world, 200000).ok);
        world.MineBlocks(1);
        REQUIRE(Withdraw(world, s).ok);
        world.MineBlocks(1);
        if (s == 4) {
            REQUIRE(ManualReject(world, s).ok);
            ++planted_reject;
        } else {
            world.MineBlocks(2);
            REQUIRE(Spend(world, s, 60000).ok);
            ++planted_honest;
        }
        world.MineBlocks(1);
    }

    // Synthetic non-covenant traffic: assorted taproot spends.
    for (int i = 0; i < 50; ++i) {
        KeyPair kp = KeypairGen(world.SeedHash("synth", i));
        ScriptProgram prog;
        prog.instructions.push_back(Instruction::MakePushKey(kp.pub));
        prog.instructions.push_back(Instruction::Simple(Opcode::CheckSig));
        TapLeaf leaf;
        leaf.script = prog;
        TapTree tree = TapTree::Leaf(leaf);
        TaprootOutput out = OutputKey(NumsInternalKey(), tree);
        Outpoint coin = world.chain.Mint(50000, TaprootScript(out.XOnly()));
        Transaction tx;
        tx.inputs.push_back(TxInput{coin.txid, coin.index, 0xffffffff, {}});
        tx.outputs.push_back(TxOutput{49000, Bytes{uint8_t(i)}});
        Signature sig =
            SignInput(tx, 0, kp.priv, Semantics::Taproot, SIGHASH_ALL, world.chain.UtxoView());
        tx.witnesses.assign(1, {});
        tx.witnesses[0].push_back(EncodeSigElement(sig, SIGHASH_ALL));
        tx.witnesses[0].push_back(prog.Serialize());
        tx.witnesses[0].push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
        REQUIRE(world.chain.Submit(tx).accepted);
        if (i % 7 == 0) world.MineBlocks(1);
    }
    world.MineBlocks(2);

    ScanResult scan = ObserverScan(world.chain);
    CHECK(scan.sequences.size() == size_t(planted_honest + planted_reject));
    int rejects = 0;
    for (const SequenceDetection& s : scan.sequences) {
        if (s.reject) ++rejects;
        if (!s.reject) CHECK(s.revealed_timelock == cfg.timelock);
    }
    CHECK(rejects == planted_reject);
    // Reject sequences carry the enforcement-key-reuse edge.
    bool reuse_edge = false;
    for (const CorrelationEdge& e : scan.graph.edges) {
        if (e.kind == "enforcement-key-reuse") reuse_edge = true;
    }
    CHECK(reuse_edge);
    // All sequences share the default internal key: one cluster.
    std::set<int> clusters;
    for (const auto& [node, c] : scan.graph.cluster) {
        (void)node;
        clusters.insert(c);
    }
    CHECK(clusters.size() == 1);
}
