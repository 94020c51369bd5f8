import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyfe.lang import Rule, ScriptedProvider
from lyfe.memory import (
    HierarchyConfig,
    MemoryBank,
    MemoryHierarchy,
    MemoryItem,
    cluster_by_similarity,
    read_memdump,
    restore_hierarchy,
    split_sentences,
    write_memdump,
)
from lyfe.scenarios import builtin_scenario_path, load_scenario


def make_item(provider, idx, text, tick=0, source="observation"):
    return MemoryItem(
        id=f"t-{idx:04d}", text=text, embedding=provider.embed(text),
        created_tick=tick, source=source,
    )


def np_cosine(a, b):
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


PARAPHRASES = [
    "the knife was covered in blood near the hotel",
    "a bloody knife was found near the hotel",
    "near the hotel a knife covered with blood turned up",
    "blood covered the knife found by the hotel",
    "the hotel knife was bloody",
    "someone found a knife with blood at the hotel",
    "knife with blood discovered close to the hotel",
    "a blood stained knife lay near the hotel",
    "the bloody hotel knife was discovered",
    "by the hotel there was a knife and blood on it",
]


class TestForgetting:
    def test_duplicate_text_evicts_older(self, provider):
        bank = MemoryBank(provider, theta=0.9)
        first = make_item(provider, 0, "the sky is clear tonight")
        bank.add_with_forgetting(first)
        evicted = bank.add_with_forgetting(
            make_item(provider, 1, "the sky is clear tonight")
        )
        assert [it.id for it in evicted] == ["t-0000"]
        assert len(bank) == 1

    def test_disjoint_items_kept(self, provider):
        bank = MemoryBank(provider, theta=0.9)
        assert bank.add_with_forgetting(make_item(provider, 0, "alpha beta gamma")) == []
        assert bank.add_with_forgetting(make_item(provider, 1, "delta epsilon zeta")) == []
        assert len(bank) == 2

    def test_paraphrase_cluster_matches_greedy_scan_oracle(self, provider):
        theta = 0.7
        bank = MemoryBank(provider, theta=theta)
        for idx, text in enumerate(PARAPHRASES):
            bank.add_with_forgetting(make_item(provider, idx, text))

        # independent oracle: sequential scan applying the rule item by item
        surviving: list[tuple[str, np.ndarray]] = []
        for idx, text in enumerate(PARAPHRASES):
            vec = provider.embed(text)
            surviving = [(i, v) for (i, v) in surviving if np_cosine(v, vec) <= theta]
            surviving.append((f"t-{idx:04d}", vec))

        assert [it.id for it in bank.snapshot()] == [i for (i, _) in surviving]

    def test_seeding_disables_forgetting(self, provider):
        bank = MemoryBank(provider, theta=0.9)
        bank.add_with_forgetting(make_item(provider, 0, "same text"), enabled=False)
        evicted = bank.add_with_forgetting(make_item(provider, 1, "same text"), enabled=False)
        assert evicted == []
        assert len(bank) == 2

    def test_capacity_evicts_oldest(self, provider):
        bank = MemoryBank(provider, theta=0.9, capacity=2)
        bank.add_with_forgetting(make_item(provider, 0, "one thing"))
        bank.add_with_forgetting(make_item(provider, 1, "two thing"))
        evicted = bank.add_with_forgetting(make_item(provider, 2, "three thing"))
        assert [it.id for it in evicted] == ["t-0000"]
        assert [it.id for it in bank.snapshot()] == ["t-0001", "t-0002"]

    @given(st.lists(st.sampled_from(PARAPHRASES + ["totally unrelated topic here"]),
                    min_size=1, max_size=25),
           st.sampled_from([0.7, 0.8, 0.9]))
    @settings(max_examples=50, deadline=None)
    def test_post_insertion_uniqueness_invariant(self, provider, texts, theta):
        bank = MemoryBank(provider, theta=theta)
        for idx, text in enumerate(texts):
            inserted = make_item(provider, idx, text)
            bank.add_with_forgetting(inserted)
            for older in bank.snapshot()[:-1]:
                assert np_cosine(older.embedding, inserted.embedding) <= theta


class TestRetrieve:
    def test_empty_bank(self, provider):
        bank = MemoryBank(provider)
        assert bank.retrieve("anything", 3) == []

    def test_exact_copy_dominates(self, provider):
        bank = MemoryBank(provider)
        bank.add_with_forgetting(make_item(provider, 0, "completely unrelated words"))
        bank.add_with_forgetting(make_item(provider, 1, "find the hidden treasure"))
        top = bank.retrieve("find the hidden treasure", 1)
        assert [it.id for it in top] == ["t-0001"]

    def test_matches_full_sort_oracle_on_seeded_memories(self, provider):
        config = load_scenario(builtin_scenario_path("murder_mystery"))
        texts = list(config.agent("Marta Rodriguez").long_term_memories)
        assert len(texts) >= 20
        bank = MemoryBank(provider, forgetting=False)
        for idx, text in enumerate(texts):
            bank.add_with_forgetting(make_item(provider, idx, text), enabled=False)
        query = "Ahmed Khan hotel room"
        got = [it.id for it in bank.retrieve(query, 3)]

        qv = provider.embed(query)
        sims = [np_cosine(provider.embed(t), qv) for t in texts]
        order = sorted(range(len(texts)), key=lambda i: (-sims[i], -i))
        want = [f"t-{i:04d}" for i in order[:3]]
        assert got == want

    def test_tie_broken_by_recency(self, provider):
        bank = MemoryBank(provider, forgetting=False)
        bank.add_with_forgetting(make_item(provider, 0, "same exact words"), enabled=False)
        bank.add_with_forgetting(make_item(provider, 1, "same exact words"), enabled=False)
        top = bank.retrieve("same exact words", 1)
        assert top[0].id == "t-0001"  # newer wins the tie

    def test_empty_query_rejected(self, provider):
        bank = MemoryBank(provider)
        with pytest.raises(Exception):
            bank.retrieve("  ", 1)

    def test_k_validation(self, provider):
        bank = MemoryBank(provider)
        with pytest.raises(ValueError):
            bank.retrieve("q", 0)


def bfs_components_oracle(items, link_threshold):
    """Connected components over the sim > threshold graph, via BFS."""
    n = len(items)
    adj = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if np_cosine(items[i].embedding, items[j].embedding) > link_threshold:
                adj[i].append(j)
                adj[j].append(i)
    seen = [False] * n
    components = []
    for start in range(n):
        if seen[start]:
            continue
        queue, comp = [start], []
        seen[start] = True
        while queue:
            node = queue.pop(0)
            comp.append(node)
            for nxt in adj[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    queue.append(nxt)
        components.append(sorted(comp))
    return sorted(components)


class TestClustering:
    def test_single_item(self, provider):
        item = make_item(provider, 0, "lonely memory")
        assert cluster_by_similarity([item], 0.8) == [[item]]

    def test_two_identical(self, provider):
        a = make_item(provider, 0, "same words here")
        b = make_item(provider, 1, "same words here")
        clusters = cluster_by_similarity([a, b], 0.8)
        assert len(clusters) == 1 and len(clusters[0]) == 2

    def test_two_groups_match_components_oracle(self, provider):
        texts = [
            "red apples in the orchard basket",
            "orchard basket full of red apples",
            "the basket of apples was red",
            "quantum entanglement in superconducting qubits",
            "superconducting qubits show quantum entanglement",
            "entangled qubits in the quantum lab",
        ]
        items = [make_item(provider, i, t) for i, t in enumerate(texts)]
        clusters = cluster_by_similarity(items, 0.5)
        got = sorted(sorted(items.index(it) for it in cluster) for cluster in clusters)
        assert got == bfs_components_oracle(items, 0.5)
        assert len(clusters) == 2

    def test_deterministic_order(self, provider):
        texts = ["alpha beta", "gamma delta", "alpha beta two"]
        items = [make_item(provider, i, t) for i, t in enumerate(texts)]
        first = cluster_by_similarity(items, 0.5)
        second = cluster_by_similarity(items, 0.5)
        assert [[it.id for it in c] for c in first] == [[it.id for it in c] for c in second]

    def test_empty_rejected(self, provider):
        with pytest.raises(ValueError):
            cluster_by_similarity([], 0.8)


def consolidation_fixture_texts():
    """12 texts forming 4 token-disjoint groups (5+3+3+1); within-group
    similarity 5/6 > 0.8, across groups 0."""
    bases = [
        "harvest festival lanterns river procession",
        "clinic ledger inventory medicine shelves",
        "kendo practice discipline morning dojo",
        "lighthouse keeper journal storm warning",
    ]
    sizes = [5, 3, 3, 1]
    texts = []
    for base, size in zip(bases, sizes):
        for k in range(size):
            texts.append(f"{base} v{k}")
    return texts


class TestConsolidation:
    def make_hierarchy(self, provider, capacity=12):
        config = HierarchyConfig(recent_capacity=capacity)
        return MemoryHierarchy(provider, owner="tester", config=config)

    def scripted_consolidator(self):
        rules = [
            Rule("consolidate", ["harvest"], "The town held its harvest festival by the river."),
            Rule("consolidate", ["clinic"], "Clinic stock was counted and shelved."),
            Rule("consolidate", ["kendo"], "Morning kendo practice built discipline."),
            Rule("consolidate", ["lighthouse"], "The keeper logged a storm warning."),
        ]
        return ScriptedProvider(rules, default_response="misc notes")

    def test_noop_below_capacity(self, provider):
        h = self.make_hierarchy(provider, capacity=12)
        lm = self.scripted_consolidator()
        h.recentmem.add_with_forgetting(h.new_item("lonely note for later", "summary", 0))
        result = h.consolidate(lm)
        assert result.moved == 0
        assert len(h.recentmem) == 1

    def test_identical_texts_collapse_to_one(self, provider):
        h = self.make_hierarchy(provider, capacity=4)
        lm = self.scripted_consolidator()
        for _ in range(4):
            h.recentmem.add_with_forgetting(
                h.new_item("kendo practice discipline morning dojo", "summary", 0),
                enabled=False,
            )
        assert len(h.recentmem) == 4
        result = h.consolidate(lm)
        assert len(h.longmem) == 1
        assert result.clusters == 1

    def test_twelve_item_fixture(self, provider):
        h = self.make_hierarchy(provider, capacity=12)
        lm = self.scripted_consolidator()
        for idx, text in enumerate(consolidation_fixture_texts()):
            h.recentmem.add_with_forgetting(
                h.new_item(text, "summary", idx), enabled=False
            )
        assert h.recent_is_full()
        result = h.consolidate(lm, tick=12)
        # one cluster per group; the singleton passes through with no call
        assert result.clusters == 4
        assert result.llm_calls == 3
        assert len(lm.ledger) == 3
        assert result.moved == 4
        assert len(h.longmem) == 4
        assert len(h.recentmem) == 0
        sources = {it.source for it in h.longmem.snapshot()}
        assert sources == {"consolidated", "summary"}  # 3 summaries + the singleton

    def test_singleton_passthrough_is_same_item(self, provider):
        h = self.make_hierarchy(provider)
        lm = self.scripted_consolidator()
        item = h.new_item("lighthouse keeper journal storm warning", "summary", 3)
        outputs, calls = h.summarize_cluster([item], lm, tick=5)
        assert outputs == [item]
        assert calls == 0
        assert len(lm.ledger) == 0

    def test_provider_failure_fails_open(self, provider, failing_lm):
        h = self.make_hierarchy(provider, capacity=3)
        texts = ["alpha beta gamma delta one", "alpha beta gamma delta two",
                 "alpha beta gamma delta three"]
        for idx, text in enumerate(texts):
            h.recentmem.add_with_forgetting(h.new_item(text, "summary", idx), enabled=False)
        result = h.consolidate(failing_lm, tick=3)
        # cluster retained unsummarized; items moved as-is through forgetting
        assert result.moved >= 1
        assert all(it.source == "summary" for it in h.longmem.snapshot())

    def test_conservation_every_item_represented_or_evicted(self, provider):
        h = self.make_hierarchy(provider, capacity=12)
        lm = self.scripted_consolidator()
        texts = consolidation_fixture_texts()
        for idx, text in enumerate(texts):
            h.recentmem.add_with_forgetting(h.new_item(text, "summary", idx), enabled=False)
        before = {it.id for it in h.recentmem.snapshot()}
        result = h.consolidate(lm, tick=12)
        after_ids = {it.id for it in h.longmem.snapshot()}
        evicted_ids = {it.id for it in result.evicted}
        # every source item is either in longmem verbatim (singleton), or its
        # cluster summary is; nothing vanished outside the forgetting step
        assert result.moved == len(after_ids - before | (after_ids & before))
        assert evicted_ids.isdisjoint(after_ids)
        assert len(h.recentmem) == 0


class TestSentenceSplit:
    def test_splits_on_terminal_punctuation(self):
        parts = split_sentences("I saw the knife. It was bloody! Who did this?")
        assert parts == ["I saw the knife.", "It was bloody!", "Who did this?"]

    def test_trims_tiny_fragments(self):
        parts = split_sentences("Yes. The hotel room was locked from inside.")
        assert parts == ["The hotel room was locked from inside."]

    def test_no_terminal_punctuation(self):
        assert split_sentences("a single unpunctuated thought") == [
            "a single unpunctuated thought"
        ]


class TestMemdump:
    def test_round_trip(self, provider, tmp_path):
        h = MemoryHierarchy(provider, owner="dumper")
        h.seed(["recent note about the town"], ["old memory of the festival"])
        h.workmem.add_with_forgetting(h.new_item("fresh observation here", "observation", 5))
        path = tmp_path / "dump.jsonl"
        count = write_memdump(h, path)
        assert count == 3
        banks = read_memdump(path)
        assert {b: len(items) for b, items in banks.items()} == {
            "workmem": 1, "recentmem": 1, "longmem": 1,
        }
        item = banks["longmem"][0]
        assert item.text == "old memory of the festival"
        assert np.array_equal(item.embedding, provider.embed(item.text))

    def test_restore_preserves_embeddings_without_reembedding(self, provider, tmp_path):
        h = MemoryHierarchy(provider, owner="dumper")
        h.seed([], ["a seeded fact about the izakaya"])
        path = tmp_path / "dump.jsonl"
        write_memdump(h, path)
        restored = restore_hierarchy(path, provider, owner="dumper")
        assert [it.text for it in restored.longmem.snapshot()] == [
            "a seeded fact about the izakaya"
        ]
        # identical bytes when re-dumped
        path2 = tmp_path / "dump2.jsonl"
        write_memdump(restored, path2)
        assert path.read_text() == path2.read_text()

    def test_header_validation(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text(json.dumps({"format": "other"}) + "\n")
        with pytest.raises(ValueError):
            read_memdump(bad)


class TestHierarchyConfig:
    def test_workmem_capacity_bounds(self):
        with pytest.raises(ValueError):
            HierarchyConfig(workmem_capacity=3)
        with pytest.raises(ValueError):
            HierarchyConfig(workmem_capacity=6)
        assert HierarchyConfig(workmem_capacity=4).workmem_capacity == 4

    def test_flat_mode_single_bank(self, provider):
        h = MemoryHierarchy(provider, config=HierarchyConfig(flat=True))
        assert h.workmem is h.recentmem is h.longmem
        assert list(h.banks()) == ["flat"]
        assert h.longmem.forgetting is False

    def test_clone_is_independent(self, provider):
        h = MemoryHierarchy(provider, owner="orig")
        h.seed([], ["first seeded memory text"])
        twin = h.clone()
        twin.longmem.add_with_forgetting(
            twin.new_item("only in the twin", "reflection", 1)
        )
        assert len(h.longmem) == 1
        assert len(twin.longmem) == 2


class TestRetrievalDiversity:
    def test_top_two_results_below_theta_after_forgetting(self, provider):
        # near-duplicates collapse on insertion, so the top-2 retrieval hits
        # come from different similarity clusters
        theta = 0.7
        bank = MemoryBank(provider, theta=theta)
        texts = PARAPHRASES + [
            "the festival lanterns lit the river tonight",
            "lanterns on the river lit the festival tonight",
        ]
        for idx, text in enumerate(texts):
            bank.add_with_forgetting(make_item(provider, idx, text))
        top = bank.retrieve("knife found near the hotel", 2)
        assert len(top) == 2
        assert np_cosine(top[0].embedding, top[1].embedding) <= theta


class TestLongmemDeterminism:
    def test_identical_input_sequences_give_identical_dumps(self, provider, tmp_path):
        def build(tag):
            config = HierarchyConfig(recent_capacity=6)
            h = MemoryHierarchy(provider, owner="agent", config=config)
            lm = ScriptedProvider(
                [Rule("consolidate", [], "a combined note about recent events")],
            )
            for idx, text in enumerate(consolidation_fixture_texts()[:6]):
                h.recentmem.add_with_forgetting(
                    h.new_item(text, "summary", idx), enabled=False
                )
            h.consolidate(lm, tick=6)
            path = tmp_path / f"{tag}.jsonl"
            write_memdump(h, path)
            return path.read_bytes()

        assert build("a") == build("b")


class TestConcurrentAccess:
    def test_retrieve_during_heavy_insertion(self, provider):
        # the self-monitor loop may retrieve while the action loop inserts;
        # every operation sees a consistent bank state
        import threading

        bank = MemoryBank(provider, theta=0.8)
        texts = [f"{base} variant {i}" for i in range(80)
                 for base in ("river festival lantern night",
                              "clinic ledger medicine shelf")]
        errors = []

        def writer():
            try:
                for idx, text in enumerate(texts):
                    bank.add_with_forgetting(make_item(provider, idx, text))
            except Exception as err:  # pragma: no cover - failure reporting
                errors.append(err)

        def reader():
            try:
                for _ in range(200):
                    results = bank.retrieve("festival lantern", 3)
                    assert len(results) <= 3
                    for item in results:
                        assert item.text  # snapshot is fully formed
            except Exception as err:  # pragma: no cover
                errors.append(err)

        threads = [threading.Thread(target=writer)] + [
            threading.Thread(target=reader) for _ in range(3)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        # final contents still satisfy the forgetting invariant: any older
        # survivor was present when each newer item was inserted
        items = bank.snapshot()
        for newer_idx in range(len(items)):
            for older_idx in range(newer_idx):
                sim = np_cosine(items[older_idx].embedding, items[newer_idx].embedding)
                assert sim <= 0.8 + 1e-12
