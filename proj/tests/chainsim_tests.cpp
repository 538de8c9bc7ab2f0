// Copyright (c) 2026 The Covlab developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <doctest.h>

#include "chainsim/chain.h"
#include "crypto/hash.h"
#include "testutil.h"

using namespace covlab;

namespace {

struct TaprootCoin {
    KeyPair kp;
    ScriptProgram script;
    TapLeaf leaf;
    Bytes spk;
    Outpoint op;
    uint64_t amount;
};

uint64_t g_coin_counter = 1000;

TaprootCoin MintTaprootCoin(ChainState& chain, uint64_t amount)
{
    TaprootCoin coin;
    coin.kp = KeypairGen(TaggedHashWriter("covlab/test-coin").WriteU64(g_coin_counter++).Finalize());
    coin.script.instructions.push_back(Instruction::MakePushKey(coin.kp.pub));
    coin.script.instructions.push_back(Instruction::Simple(Opcode::CheckSig));
    coin.leaf.script = coin.script;
    TapTree tree = TapTree::Leaf(coin.leaf);
    TaprootOutput out = OutputKey(NumsInternalKey(), tree);
    coin.spk = TaprootScript(out.XOnly());
    coin.amount = amount;
    coin.op = chain.Mint(amount, coin.spk);
    return coin;
}

// Signed single-input spend of a taproot coin.
Transaction SpendCoin(const ChainState& chain, const TaprootCoin& coin,
                      std::vector<TxOutput> outputs, uint32_t sequence = 0xfffffffd)
{
    Transaction tx;
    tx.inputs.push_back(TxInput{coin.op.txid, coin.op.index, sequence, {}});
    tx.outputs = std::move(outputs);
    PrevoutView view = chain.UtxoView();
    TxOutput prevout{coin.amount, coin.spk};
    Outpoint op = coin.op;
    PrevoutView full = [view, prevout, op](const Outpoint& o) -> std::optional<TxOutput> {
        if (o == op) return prevout;
        return view(o);
    };
    Signature sig = SignInput(tx, 0, coin.kp.priv, Semantics::Taproot, SIGHASH_ALL, full);
    tx.witnesses.assign(1, {});
    tx.witnesses[0].push_back(EncodeSigElement(sig, SIGHASH_ALL));
    tx.witnesses[0].push_back(coin.script.Serialize());
    TapTree tree = TapTree::Leaf(coin.leaf);
    tx.witnesses[0].push_back(ProveInclusion(tree, coin.leaf, NumsInternalKey()).Serialize());
    return tx;
}

} // namespace

TEST_CASE("submission validates spends and rejects double spends")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 50000);
    Transaction tx = SpendCoin(chain, coin, {TxOutput{40000, Bytes{0x01}}});
    CHECK(chain.Submit(tx).accepted);

    Transaction conflict = SpendCoin(chain, coin, {TxOutput{39000, Bytes{0x02}}});
    SubmitResult r = chain.Submit(conflict);
    CHECK(!r.accepted);
    CHECK(r.reason == RejectReason::DoubleSpend);

    chain.MineBlock();
    // Spending the outpoint after it was consumed on-chain is a double spend.
    SubmitResult r2 = chain.Submit(conflict);
    CHECK(!r2.accepted);
    CHECK(r2.reason == RejectReason::DoubleSpend);

    // A forged witness is rejected.
    TaprootCoin coin2 = MintTaprootCoin(chain, 50000);
    Transaction bad = SpendCoin(chain, coin2, {TxOutput{40000, Bytes{0x03}}});
    bad.witnesses[0][0][5] ^= 1;
    SubmitResult r3 = chain.Submit(bad);
    CHECK(!r3.accepted);
    CHECK(r3.reason == RejectReason::BadWitness);

    // Unknown input.
    Transaction missing = bad;
    missing.inputs[0].prev_txid[0] ^= 1;
    CHECK(chain.Submit(missing).reason == RejectReason::MissingInput);
}

TEST_CASE("a child can spend an in-mempool parent")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 100000);
    // Parent pays to an anyone-can-spend stub so the child needs no witness.
    Transaction parent = SpendCoin(chain, coin, {TxOutput{90000, Bytes{0x44}}});
    CHECK(chain.Submit(parent).accepted);

    Transaction child;
    child.inputs.push_back(TxInput{Txid(parent), 0, 0xfffffffd, {}});
    child.outputs.push_back(TxOutput{80000, Bytes{0x45}});
    CHECK(chain.Submit(child).accepted);

    Block b = chain.MineBlock();
    REQUIRE(b.transactions.size() == 2);
    CHECK(Txid(b.transactions[0]) == Txid(parent));
    CHECK(Txid(b.transactions[1]) == Txid(child));
}

TEST_CASE("relative locks gate mempool entry at the boundary")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 100000);
    Transaction create = SpendCoin(chain, coin, {TxOutput{90000, Bytes{0x50}}});
    CHECK(chain.Submit(create).accepted);
    chain.MineBlock();

    const uint32_t lock = 5;
    Transaction spend;
    spend.inputs.push_back(TxInput{Txid(create), 0, lock, {}});
    spend.outputs.push_back(TxOutput{80000, Bytes{0x51}});

    chain.MineBlocks(lock - 1); // age is now lock-1
    SubmitResult early = chain.Submit(spend);
    CHECK(!early.accepted);
    CHECK(early.reason == RejectReason::PrematureLock);

    chain.MineBlock(); // age == lock
    CHECK(chain.Submit(spend).accepted);
    chain.MineBlock();
    CHECK(chain.AuditNoCsvViolation());
}

TEST_CASE("replacement follows the signaling and fee rules")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 100000);
    Transaction original = SpendCoin(chain, coin, {TxOutput{90000, Bytes{0x61}}});
    CHECK(chain.Submit(original).accepted);

    // Higher absolute fee replacement of a signaling original is accepted.
    Transaction bumped = SpendCoin(chain, coin, {TxOutput{89000, Bytes{0x61}}});
    CHECK(chain.Replace(bumped).accepted);
    CHECK(!chain.InMempool(Txid(original)));
    CHECK(chain.InMempool(Txid(bumped)));

    // Equal-fee replacement is rejected.
    Transaction equal = SpendCoin(chain, coin, {TxOutput{89000, Bytes{0x62}}});
    CHECK(chain.Replace(equal).reason == RejectReason::FeeNotHigher);

    // Non-signaling originals cannot be replaced.
    ChainState chain2;
    TaprootCoin coin2 = MintTaprootCoin(chain2, 100000);
    Transaction fixed = SpendCoin(chain2, coin2, {TxOutput{90000, Bytes{0x63}}}, 0xffffffff);
    CHECK(chain2.Submit(fixed).accepted);
    Transaction try_replace = SpendCoin(chain2, coin2, {TxOutput{80000, Bytes{0x64}}});
    CHECK(chain2.Replace(try_replace).reason == RejectReason::NotSignaling);
}

TEST_CASE("block building is greedy by ancestor package feerate")
{
    ChainState chain;
    // Low-fee parent plus high-fee child are selected together.
    TaprootCoin coin = MintTaprootCoin(chain, 1000000);
    Transaction parent = SpendCoin(chain, coin, {TxOutput{999700, Bytes{0x70}}});
    size_t parent_size = TxSize(parent);
    CHECK(chain.Submit(parent).accepted); // ~1 sat/B
    (void)parent_size;

    Transaction child;
    child.inputs.push_back(TxInput{Txid(parent), 0, 0xfffffffd, {}});
    child.outputs.push_back(TxOutput{949700, Bytes{0x71}});
    CHECK(chain.Submit(child).accepted); // very high fee

    Block b = chain.MineBlock();
    REQUIRE(b.transactions.size() == 2);
    CHECK(Txid(b.transactions[0]) == Txid(parent));
    CHECK(chain.AuditConservation());

    // A giant low-feerate transaction is excluded while the budget fills with
    // better packages.
    ChainState chain3(ChainConfig{1, 2000, false, false});
    TaprootCoin big_coin = MintTaprootCoin(chain3, 500000);
    Transaction big = SpendCoin(chain3, big_coin, {TxOutput{497500, Bytes{0x72}}});
    // Junk-inflated: an extra truthy stack element bloats the size.
    big.witnesses[0].insert(big.witnesses[0].begin(), Bytes(1700, 0x5a));
    CHECK(chain3.Submit(big).accepted);
    TaprootCoin small_coin = MintTaprootCoin(chain3, 500000);
    Transaction small = SpendCoin(chain3, small_coin, {TxOutput{450000, Bytes{0x73}}});
    CHECK(chain3.Submit(small).accepted);
    Block b3 = chain3.MineBlock();
    REQUIRE(b3.transactions.size() == 1);
    CHECK(Txid(b3.transactions[0]) == Txid(small));

    // Empty mempool mines an empty block.
    ChainState chain4;
    Block b4 = chain4.MineBlock();
    CHECK(b4.transactions.empty());
}

TEST_CASE("confirmations count from inclusion")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 100000);
    Transaction tx = SpendCoin(chain, coin, {TxOutput{90000, Bytes{0x80}}});
    Bytes32 id = Txid(tx);
    CHECK(chain.Confirmations(id) == 0);
    chain.Submit(tx);
    CHECK(chain.Confirmations(id) == 0);
    chain.MineBlock();
    CHECK(chain.Confirmations(id) == 1);
    chain.MineBlocks(5);
    CHECK(chain.Confirmations(id) == 6);
    chain.MineBlock();
    CHECK(chain.Confirmations(id) == 7);
}

TEST_CASE("fee spikes crowd out low-feerate transactions")
{
    ChainState chain;
    chain.SetAdversaryFeeBudget(80ull * 100000ull * 3ull); // three spike blocks
    TaprootCoin coin = MintTaprootCoin(chain, 10000000);
    Transaction tx = SpendCoin(chain, coin, {TxOutput{10000000 - 40 * 300, Bytes{0x90}}});
    // ~40 sat/B.
    CHECK(chain.Submit(tx).accepted);

    chain.FeeSpike(80, 10); // requested ten blocks; budget sustains three
    CHECK(!chain.InMempool(Txid(tx))); // evicted below the floor
    SubmitResult r = chain.Submit(tx);
    CHECK(!r.accepted);
    CHECK(r.reason == RejectReason::FeeTooLow);

    chain.MineBlocks(3); // budget exhausted
    chain.MineBlock();   // spike collapsed
    CHECK(chain.Submit(tx).accepted);
    chain.MineBlock();
    CHECK(chain.Confirmations(Txid(tx)) == 1);

    // A zero-level spike changes nothing.
    ChainState chain2;
    TaprootCoin c2 = MintTaprootCoin(chain2, 100000);
    Transaction t2 = SpendCoin(chain2, c2, {TxOutput{90000, Bytes{0x91}}});
    CHECK(chain2.Submit(t2).accepted);
    chain2.FeeSpike(0, 5);
    CHECK(chain2.InMempool(Txid(t2)));
    Block b = chain2.MineBlock();
    CHECK(b.transactions.size() == 1);
}

TEST_CASE("pinning requires signaling and a mutable signature set")
{
    ChainState chain;
    TaprootCoin coin = MintTaprootCoin(chain, 1000000);
    Transaction target = SpendCoin(chain, coin, {TxOutput{960000, Bytes{0xa0}}});
    CHECK(chain.Submit(target).accepted);

    // Immutable signature set: the pin is refused.
    SubmitResult refused =
        chain.Pin(Txid(target), 5000, [](const Transaction&) { return false; });
    CHECK(!refused.accepted);
    CHECK(refused.reason == RejectReason::Immutable);

    // Mutable signature set (A1CP-class): the pin lands and craters feerate.
    // SpendCoin signs SIGHASH_ALL, so rebind with an A1CP||ALL signature.
    Transaction a1cp;
    a1cp.inputs.push_back(TxInput{coin.op.txid, coin.op.index, 0xfffffffd, {}});
    a1cp.outputs.push_back(TxOutput{950000, Bytes{0xa0}});
    PrevoutView view = chain.UtxoView();
    Signature sig = SignInput(a1cp, 0, coin.kp.priv, Semantics::Taproot, SIGHASH_A1CP_ALL, view);
    a1cp.witnesses.assign(1, {});
    a1cp.witnesses[0].push_back(EncodeSigElement(sig, SIGHASH_A1CP_ALL));
    a1cp.witnesses[0].push_back(coin.script.Serialize());
    TapTree tree = TapTree::Leaf(coin.leaf);
    a1cp.witnesses[0].push_back(ProveInclusion(tree, coin.leaf, NumsInternalKey()).Serialize());
    CHECK(chain.Replace(a1cp).accepted);

    SubmitResult pinned =
        chain.Pin(Txid(a1cp), 20000, [](const Transaction&) { return true; });
    CHECK(pinned.accepted);
    CHECK(!chain.InMempool(Txid(a1cp)));
}

TEST_CASE("determinism: identical submissions yield identical blocks")
{
    auto run = [](uint64_t throwaway) {
        ChainState chain;
        (void)throwaway;
        TaprootCoin a = MintTaprootCoin(chain, 400000);
        TaprootCoin b = MintTaprootCoin(chain, 500000);
        chain.Submit(SpendCoin(chain, a, {TxOutput{350000, Bytes{0xb0}}}));
        chain.Submit(SpendCoin(chain, b, {TxOutput{450000, Bytes{0xb1}}}));
        chain.MineBlocks(3);
        return chain.EventLogLines();
    };
    g_coin_counter = 5000;
    std::string first = run(1);
    g_coin_counter = 5000;
    std::string second = run(2);
    CHECK(first == second);
}

TEST_CASE("audits hold after mixed activity")
{
    ChainState chain;
    TaprootCoin a = MintTaprootCoin(chain, 300000);
    TaprootCoin b = MintTaprootCoin(chain, 400000);
    Transaction t1 = SpendCoin(chain, a, {TxOutput{290000, Bytes{0xc0}}});
    chain.Submit(t1);
    chain.MineBlock();
    Transaction t2 = SpendCoin(chain, b, {TxOutput{190000, Bytes{0xc1}}, TxOutput{200000, Bytes{0xc2}}});
    chain.Submit(t2);
    chain.MineBlocks(2);
    CHECK(chain.AuditConservation());
    CHECK(chain.AuditNoCsvViolation());
    CHECK(chain.AuditUtxoReplay());
}
