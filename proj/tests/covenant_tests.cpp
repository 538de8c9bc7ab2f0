// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include "covenant/compose.h"
#include "covenant/feestrategy.h"
#include "covenant/por.h"
#include "covenant/session.h"
#include "crypto/hash.h"
#include "script/satisfier.h"

using namespace covlab;

namespace {

std::function<std::optional<Scalar>(size_t)> CustodialSigner(const CovenantArtifacts& artifacts,
                                                             size_t limit)
{
    return [&artifacts, limit](size_t i) -> std::optional<Scalar> {
        if (i >= limit || i >= artifacts.cust_privs.size()) return std::nullopt;
        return artifacts.cust_privs[i];
    };
}

// Theft attempt: the coalition tries to move the covenant-bound output to a
// destination of its own with `recovered` enforcement scalars and
// `cust_count` custodial keys. Returns the chain's verdict.
bool TheftSucceeds(ChainState& chain, const CovenantArtifacts& artifacts, size_t recovered,
                   size_t cust_count)
{
    const CovenantSpecParams& p = artifacts.params;
    Transaction theft;
    theft.inputs.push_back(TxInput{artifacts.dep_txid, 0, 0xffffffff, {}});
    theft.outputs.push_back(TxOutput{p.deposit_amount - p.cov_fee, Bytes{0x66}});

    PrevoutView view = artifacts.DepView();
    // The scripts count signatures exactly, so a competent thief uses at most
    // the thresholds even when the coalition holds more keys.
    std::map<size_t, Bytes> enf_sigs;
    size_t got = 0;
    for (size_t l = 0;
         l < artifacts.deletions.size() && got < std::min<size_t>(recovered, p.m); ++l) {
        auto scalar = artifacts.deletions[l].AttemptRecovery(AttackerLevel::High);
        if (!scalar) continue;
        Signature sig = SignInput(theft, 0, *scalar, Semantics::Taproot, SIGHASH_ALL, view);
        enf_sigs[l] = EncodeSigElement(sig, SIGHASH_ALL);
        ++got;
    }
    std::map<size_t, Bytes> cust_sigs;
    for (size_t i = 0;
         i < std::min<size_t>(cust_count, p.j) && i < artifacts.cust_privs.size(); ++i) {
        Signature sig =
            SignInput(theft, 0, artifacts.cust_privs[i], Semantics::Taproot, SIGHASH_ALL, view);
        cust_sigs[i] = EncodeSigElement(sig, SIGHASH_ALL);
    }

    theft.witnesses.assign(1, {});
    WitnessStack& w = theft.witnesses[0];
    for (const Bytes& e : MultisigWitnessElements(artifacts.cust_pubs.size(), cust_sigs)) {
        w.push_back(e);
    }
    for (const Bytes& e : MultisigWitnessElements(artifacts.enf_pubs.size(), enf_sigs)) {
        w.push_back(e);
    }
    TapLeaf leaf;
    leaf.script = artifacts.l_cov;
    TapTree tree = TapTree::Leaf(leaf);
    w.push_back(artifacts.l_cov.Serialize());
    w.push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());

    return chain.Submit(theft).accepted;
}

} // namespace

TEST_CASE("honest session completes and activates at depth six")
{
    ChainState chain;
    CovenantSpecParams params;
    params.n = params.m = 2;
    params.k = params.j = 2;
    SessionResult result = RunSession(chain, params);
    REQUIRE(result.outcome == SessionOutcome::Completed);
    const CovenantArtifacts& a = *result.artifacts;

    // Deletion records exist for every enforcement key; the deposit is
    // broadcast but not yet deep enough.
    CHECK(a.deletions.size() == 2);
    CHECK(chain.InMempool(a.dep_txid));
    chain.MineBlocks(3);
    CovenantStatus pending = CheckEnforcement(a, chain, {});
    CHECK(pending.kind == CovenantStatusKind::Pending);
    chain.MineBlocks(3);
    CovenantStatus active = CheckEnforcement(a, chain, {});
    CHECK(active.kind == CovenantStatusKind::Active);

    // A transcript survives serialization.
    CHECK(result.ToJson()["outcome"] == "completed");
}

TEST_CASE("session aborts on a tampered signature at step 8")
{
    // An invalid enforcement signature is caught by the depositor's
    // verification gate.
    ChainState chain;
    CovenantSpecParams params;
    SessionAdversary adv;
    adv.stolen_credentials = {"enforcer-1"};
    adv.replace_sig = [&](int step, const std::string& from, const std::string&,
                          const Signature& sig) -> std::optional<Signature> {
        if (step == 7 && from == "enforcer-1") {
            Signature bad = sig;
            bad[7] ^= 1;
            return bad;
        }
        return sig;
    };
    SessionResult r = RunSession(chain, params, &adv);
    REQUIRE(r.outcome == SessionOutcome::Aborted);
    CHECK(r.abort_step == 8);
    CHECK(r.abort_reason == "BadSignature");
    CHECK(r.aborting_party == "depositor");
}

TEST_CASE("an excluded enforcer detects the swap at step 6")
{
    // A spoofed enforcement key leaves the honest enforcer out of l_cov; it
    // notices its key is missing when verifying the script format.
    ChainState chain;
    CovenantSpecParams params;
    SessionAdversary adv;
    adv.stolen_credentials = {"enforcer-1"};
    KeyPair imposter = KeypairGen(TaggedHash("covlab/test-imposter", {1}));
    adv.replace_key = [&](int step, const std::string&, const std::string& to,
                          const GroupPoint& key) -> std::optional<GroupPoint> {
        if (step == 2 && to == "depositor") return imposter.pub;
        return key;
    };
    SessionResult r = RunSession(chain, params, &adv);
    REQUIRE(r.outcome == SessionOutcome::Aborted);
    CHECK(r.abort_step == 6);
    CHECK(r.abort_reason == "BadScript");
    CHECK(r.aborting_party == "enforcer-1");
}

TEST_CASE("custodian aborts when its key is missing from the script")
{
    // The depositor (spoofed) assembled l_cov without the custodian's key;
    // step 6 verification catches it at the custodian.
    ChainState chain;
    CovenantSpecParams params;
    SessionAdversary adv;
    adv.stolen_credentials = {"custodian-2"};
    KeyPair imposter = KeypairGen(TaggedHash("covlab/test-imposter", {2}));
    adv.replace_key = [&](int step, const std::string& from, const std::string&,
                          const GroupPoint& key) -> std::optional<GroupPoint> {
        if (step == 1 && from == "custodian-2") return imposter.pub;
        return key;
    };
    SessionResult r = RunSession(chain, params, &adv);
    REQUIRE(r.outcome == SessionOutcome::Aborted);
    CHECK(r.abort_step == 6);
    CHECK(r.abort_reason == "BadScript");
    CHECK(r.aborting_party == "custodian-2");
}

TEST_CASE("unresponsive parties abort with Timeout")
{
    ChainState chain;
    CovenantSpecParams params;
    SessionAdversary adv;
    adv.unresponsive_parties = {"enforcer-2"};
    SessionResult r = RunSession(chain, params, &adv);
    REQUIRE(r.outcome == SessionOutcome::Aborted);
    CHECK(r.abort_reason == "Timeout");
}

TEST_CASE("finalize needs exactly the custodial threshold")
{
    ChainState chain;
    CovenantSpecParams params;
    params.k = 3;
    params.j = 2;
    SessionResult result = RunSession(chain, params);
    REQUIRE(result.outcome == SessionOutcome::Completed);
    const CovenantArtifacts& a = *result.artifacts;
    chain.MineBlocks(6);

    CHECK_THROWS_AS(FinalizeCovenant(a, CustodialSigner(a, 1)), Unsatisfiable);
    CHECK_THROWS_AS(FinalizeCovenant(a, CustodialSigner(a, 0)), Unsatisfiable);
    Transaction finalized = FinalizeCovenant(a, CustodialSigner(a, 2));
    CHECK(chain.Submit(finalized).accepted);
    chain.MineBlock();
    CHECK(chain.Confirmations(a.CovTxid()) == 1);
}

TEST_CASE("broken status after recovering the enforcement threshold")
{
    ChainState chain;
    CovenantSpecParams params;
    params.deletion_method = DeletionMethod::Dispose;
    SessionResult result = RunSession(chain, params);
    REQUIRE(result.outcome == SessionOutcome::Completed);
    chain.MineBlocks(6);
    const CovenantArtifacts& a = *result.artifacts;

    CHECK(CheckEnforcement(a, chain, {}).kind == CovenantStatusKind::Active);
    // A low-capability attacker recovers dispose-deleted keys.
    CovenantStatus broken = CheckEnforcement(a, chain, {AttackerLevel::Low});
    CHECK(broken.kind == CovenantStatusKind::Broken);

    // Purge-deleted keys resist a medium attacker.
    ChainState chain2;
    CovenantSpecParams p2;
    p2.deletion_method = DeletionMethod::Purge;
    SessionResult r2 = RunSession(chain2, p2);
    chain2.MineBlocks(6);
    CHECK(CheckEnforcement(*r2.artifacts, chain2, {AttackerLevel::Medium}).kind ==
          CovenantStatusKind::Active);

    // Losing every custodian's copy breaks the covenant outright.
    CovenantArtifacts lost = *result.artifacts;
    lost.custodian_has_copy.assign(lost.custodian_has_copy.size(), false);
    CHECK(CheckEnforcement(lost, chain, {}).kind == CovenantStatusKind::Broken);
}

TEST_CASE("exhaustive coalition boundary at small parameters")
{
    // No coalition below (m enforcement recoveries, j custodial keys) can
    // produce any accepted spend other than TX_cov; a coalition at (m, j)
    // can. Denial of finalization needs exactly k-j+1 custodians.
    for (auto [n, m] : std::vector<std::pair<uint32_t, uint32_t>>{{2, 2}, {3, 2}}) {
        for (auto [k, j] : std::vector<std::pair<uint32_t, uint32_t>>{{2, 2}, {5, 2}, {5, 3}}) {
            ChainState chain;
            CovenantSpecParams params;
            params.n = n;
            params.m = m;
            params.k = k;
            params.j = j;
            params.deletion_method = DeletionMethod::Dispose; // recoverable
            SessionResult result = RunSession(chain, params);
            REQUIRE(result.outcome == SessionOutcome::Completed);
            chain.MineBlocks(6);
            const CovenantArtifacts& a = *result.artifacts;

            for (uint32_t e = 0; e <= n; ++e) {
                for (uint32_t c = 0; c <= k; ++c) {
                    ChainState attempt_chain;
                    CovenantSpecParams p2 = params;
                    SessionResult r2 = RunSession(attempt_chain, p2);
                    REQUIRE(r2.outcome == SessionOutcome::Completed);
                    attempt_chain.MineBlocks(6);
                    bool stolen = TheftSucceeds(attempt_chain, *r2.artifacts, e, c);
                    bool expected = (e >= m) && (c >= j);
                    INFO("n=" << n << " m=" << m << " k=" << k << " j=" << j << " e=" << e
                              << " c=" << c);
                    CHECK(stolen == expected);
                }
            }

            // Denial: c uncooperative custodians block finalization iff
            // c >= k - j + 1 (fewer than j remain).
            for (uint32_t c = 0; c <= k; ++c) {
                uint32_t honest = k - c;
                bool denied;
                try {
                    FinalizeCovenant(a, CustodialSigner(a, honest));
                    denied = false;
                } catch (const Unsatisfiable&) {
                    denied = true;
                }
                CHECK(denied == (c >= k - j + 1));
            }
        }
    }
}

TEST_CASE("multi-deposit covenants need every deposit confirmed")
{
    ChainState chain;
    CovenantGraph graph = ComposeMultiDeposit(chain, 3, 50000);
    CHECK(chain.Submit(graph.deposits[0].funding).accepted);
    CHECK(chain.Submit(graph.deposits[1].funding).accepted);
    chain.MineBlocks(6);
    CHECK(!MultiDepositActive(graph, chain));
    CHECK(chain.Submit(graph.deposits[2].funding).accepted);
    chain.MineBlocks(6);
    CHECK(MultiDepositActive(graph, chain));
    Transaction cov = FinalizeMultiDeposit(graph);
    CHECK(chain.Submit(cov).accepted);
}

TEST_CASE("joint chains confirm strictly in order")
{
    ChainState chain;
    CovenantGraph graph = ComposeJointChain(chain, 2, 200000);
    Transaction cov1 = graph.hops[0].Finalize();
    Transaction cov2 = graph.hops[1].Finalize();

    // The second link references the first by txid: submitting it first
    // fails outright.
    SubmitResult premature = chain.Submit(cov2);
    CHECK(!premature.accepted);
    CHECK(premature.reason == RejectReason::MissingInput);

    CHECK(chain.Submit(graph.hops[0].funding).accepted);
    chain.MineBlock();
    CHECK(chain.Submit(cov1).accepted);
    chain.MineBlock();
    CHECK(chain.Submit(cov2).accepted);
    chain.MineBlock();
    CHECK(chain.Confirmations(Txid(cov2)) == 1);

    // Mutable intermediates are rejected during composition.
    CHECK_THROWS_AS(ComposeJointChain(chain, 2, 200000, SIGHASH_A1CP_ALL), UnsafeChain);
}

TEST_CASE("disjoint alternatives invalidate each other")
{
    ChainState chain;
    CovenantGraph graph = ComposeDisjoint(chain, 150000);
    CHECK(chain.Submit(graph.alt_a->funding).accepted);
    chain.MineBlock();
    Transaction a = graph.alt_a->Finalize();
    CHECK(chain.Submit(a).accepted);
    chain.MineBlock();
    Transaction b = FinalizeDisjointB(graph);
    SubmitResult r = chain.Submit(b);
    CHECK(!r.accepted);
    CHECK(r.reason == RejectReason::DoubleSpend);
}

TEST_CASE("fee strategies carry the documented safety attributes")
{
    CHECK(AttributesFor(FeeStrategy::FeeInputs) == StrategyAttributes{false, false, false});
    CHECK(AttributesFor(FeeStrategy::ChangeOutputs) == StrategyAttributes{false, false, false});
    CHECK(AttributesFor(FeeStrategy::CpfpOutputs) == StrategyAttributes{true, false, false});
    CHECK(AttributesFor(FeeStrategy::PrepareFeeRange) == StrategyAttributes{true, false, false});
    CHECK(AttributesFor(FeeStrategy::UnsecuredFeeInputs) == StrategyAttributes{false, true, true});

    ChainState chain;
    FeeManagedCovenant with_deps =
        BuildFeeManagedCovenant(chain, FeeStrategy::FeeInputs, 500000, true);
    CHECK_THROWS_AS(ApplyFeeStrategy(chain, with_deps, 1000), UnsafeWithDependents);

    // Only the unsecured strategy leaves the input list open.
    for (FeeStrategy s : {FeeStrategy::FeeInputs, FeeStrategy::ChangeOutputs,
                          FeeStrategy::CpfpOutputs, FeeStrategy::PrepareFeeRange,
                          FeeStrategy::UnsecuredFeeInputs}) {
        ChainState c2;
        FeeManagedCovenant cov = BuildFeeManagedCovenant(c2, s, 500000, false, {1000, 5000});
        CHECK(SignatureSetAllowsAddedInputs(cov) == (s == FeeStrategy::UnsecuredFeeInputs));
    }
}

TEST_CASE("fee strategies produce accepted adjustments")
{
    for (FeeStrategy s : {FeeStrategy::FeeInputs, FeeStrategy::ChangeOutputs,
                          FeeStrategy::CpfpOutputs, FeeStrategy::PrepareFeeRange,
                          FeeStrategy::UnsecuredFeeInputs}) {
        ChainState chain;
        FeeManagedCovenant cov =
            BuildFeeManagedCovenant(chain, s, 500000, false, {1000, 5000});
        CHECK(chain.Submit(cov.hop.funding).accepted);
        chain.MineBlock();
        FeeStrategyResult r = ApplyFeeStrategy(chain, cov, 3000);
        CHECK(r.attrs == AttributesFor(s));
        if (s == FeeStrategy::CpfpOutputs) {
            REQUIRE(r.txs.size() == 2);
            CHECK(chain.SubmitPackage(r.txs).accepted);
        } else {
            REQUIRE(r.txs.size() == 1);
            INFO(FeeStrategyName(s));
            CHECK(chain.Submit(r.txs[0]).accepted);
        }
        chain.MineBlock();
        CHECK(chain.Confirmations(Txid(r.txs[0])) == 1);
    }
}

TEST_CASE("proof of reserves verifies without granting spend capability")
{
    ChainState chain;
    CovenantSpecParams params;
    params.k = 3;
    params.j = 2;
    SessionResult result = RunSession(chain, params);
    REQUIRE(result.outcome == SessionOutcome::Completed);
    const CovenantArtifacts& a = *result.artifacts;
    chain.MineBlocks(6);

    ProofOfReserves por = BuildProofOfReserves(a, CustodialSigner(a, 2));
    CHECK(VerifyProofOfReserves(por));

    // The demonstration transaction can never confirm.
    SubmitResult demo = chain.Submit(por.demo_tx);
    CHECK(!demo.accepted);

    // The proof's custodial signatures bind the fake output, not TX_cov:
    // splicing them into a finalization attempt fails the witness check.
    Transaction forged = a.tx_cov;
    forged.witnesses.assign(1, {});
    WitnessStack& w = forged.witnesses[0];
    const WitnessStack& demo_w = por.demo_tx.witnesses[0];
    for (size_t i = 0; i + 2 < demo_w.size(); ++i) w.push_back(demo_w[i]);
    std::map<size_t, Bytes> enf_sigs;
    for (size_t l = 0; l < a.enf_sigs.size(); ++l) {
        enf_sigs[l] = EncodeSigElement(a.enf_sigs[l], a.enf_sig_flags[l]);
    }
    for (const Bytes& e : MultisigWitnessElements(a.enf_pubs.size(), enf_sigs)) w.push_back(e);
    TapLeaf leaf;
    leaf.script = a.l_cov;
    TapTree tree = TapTree::Leaf(leaf);
    w.push_back(a.l_cov.Serialize());
    w.push_back(ProveInclusion(tree, leaf, NumsInternalKey()).Serialize());
    SubmitResult forged_r = chain.Submit(forged);
    CHECK(!forged_r.accepted);
    CHECK(forged_r.reason == RejectReason::BadWitness);

    // Tampered proofs fail verification.
    ProofOfReserves bad = por;
    bad.enf_sigs[0][3] ^= 1;
    CHECK(!VerifyProofOfReserves(bad));
}
