import random
import threading

import pytest
from hypothesis import given, strategies as st

from storycrowd import errors
from storycrowd.workspace import Workspace, word_count


@pytest.fixture
def ws():
    return Workspace()


class TestCharacters:
    def test_create(self, ws):
        c = ws.create_character("Detective Opal", "has a murder to solve")
        assert c.name == "Detective Opal"
        assert c.description == "has a murder to solve"
        assert not c.deleted

    def test_ids_unique(self, ws):
        ids = {ws.create_character(f"c{i}").id for i in range(50)}
        assert len(ids) == 50

    def test_empty_name_rejected(self, ws):
        with pytest.raises(errors.EmptyName):
            ws.create_character("  ", "x")

    def test_empty_description_ok(self, ws):
        c = ws.create_character("Siren Eris", "")
        assert c.description == ""

    def test_partial_update(self, ws):
        c = ws.create_character("Sgt. Woofer", "loyal")
        ws.update_character(c.id, name="Sgt. Subwoofer")
        assert c.name == "Sgt. Subwoofer"
        assert c.description == "loyal"

    def test_update_blank_name(self, ws):
        c = ws.create_character("X", "")
        with pytest.raises(errors.EmptyName):
            ws.update_character(c.id, name=" ")

    def test_soft_delete(self, ws):
        c = ws.create_character("X", "")
        ws.delete_character(c.id)
        assert c.deleted
        assert c.id not in [x.id for x in ws.list_characters()]
        assert c.id in [x.id for x in ws.list_characters(include_deleted=True)]

    def test_delete_unknown(self, ws):
        with pytest.raises(errors.NotFound):
            ws.delete_character("nope")


class TestTeams:
    def test_create(self, ws):
        ids = [ws.create_character(n).id for n in ("Opal", "Eris", "DeadDoctor")]
        team = ws.create_team("Murder Mystery", ids)
        assert team.member_ids == ids

    def test_duplicate_member(self, ws):
        c = ws.create_character("Opal")
        with pytest.raises(errors.DuplicateMember):
            ws.create_team("Solo", [c.id, c.id])

    def test_empty_team(self, ws):
        with pytest.raises(errors.EmptyTeam):
            ws.create_team("Empty", [])

    def test_deleted_member_rejected(self, ws):
        c = ws.create_character("Opal")
        ws.delete_character(c.id)
        with pytest.raises(errors.UnknownMember):
            ws.create_team("T", [c.id])

    def test_team_retains_deleted_member(self, ws):
        a = ws.create_character("A")
        b = ws.create_character("B")
        team = ws.create_team("T", [a.id, b.id])
        ws.delete_character(a.id)
        assert a.id in team.member_ids

    def test_list_excludes_deleted(self, ws):
        a = ws.create_character("A")
        t1 = ws.create_team("T1", [a.id])
        t2 = ws.create_team("T2", [a.id])
        ws.delete_team(t1.id)
        assert [t.id for t in ws.list_teams()] == [t2.id]


class TestDocumentEdits:
    def test_revision_increments(self, ws):
        doc = ws.create_document("t", "hello world")
        assert doc.revision == 0
        ws.edit_document(doc.id, 0, 0, "x")
        assert doc.revision == 1
        assert doc.body == "xhello world"

    def test_out_of_bounds(self, ws):
        doc = ws.create_document("t", "abc")
        with pytest.raises(errors.OutOfBounds):
            ws.edit_document(doc.id, 2, 5, "")

    def test_insert_before_shifts_anchor(self, ws):
        doc = ws.create_document("t", "x" * 40)
        th = ws.create_thread(doc.id, 10, 20, "o")
        ws.edit_document(doc.id, 0, 0, "yyyyy")
        assert (th.anchor.start, th.anchor.end) == (15, 25)
        assert not th.orphaned

    def test_delete_after_leaves_anchor(self, ws):
        doc = ws.create_document("t", "x" * 40)
        th = ws.create_thread(doc.id, 10, 20, "o")
        ws.edit_document(doc.id, 30, 3, "")
        assert (th.anchor.start, th.anchor.end) == (10, 20)
        assert not th.orphaned

    def test_overlapping_insert_orphans(self, ws):
        doc = ws.create_document("t", "x" * 40)
        th = ws.create_thread(doc.id, 10, 20, "o")
        ws.edit_document(doc.id, 15, 0, "zz")
        assert th.orphaned
        assert (th.anchor.start, th.anchor.end) == (10, 20)

    def test_orphaning_monotone(self, ws):
        doc = ws.create_document("t", "x" * 40)
        th = ws.create_thread(doc.id, 10, 20, "o")
        ws.edit_document(doc.id, 12, 2, "q")
        assert th.orphaned
        for _ in range(10):
            ws.edit_document(doc.id, 0, 0, "a")
            assert th.orphaned

    def test_random_nonoverlapping_edits_preserve_snapshot(self, ws):
        rng = random.Random(7)
        body = "".join(rng.choice("abcdefgh ") for _ in range(200))
        doc = ws.create_document("t", body)
        th = ws.create_thread(doc.id, 80, 120, "o")
        snapshot = th.anchor.snapshot
        for _ in range(200):
            a = th.anchor
            if rng.random() < 0.5 and a.start > 0:
                # edit strictly before the anchor
                at = rng.randrange(0, a.start)
                if rng.random() < 0.5:
                    dl = rng.randint(0, a.start - at)
                    ws.edit_document(doc.id, at, dl, "")
                else:
                    ws.edit_document(doc.id, at, 0, "ins")
            else:
                # edit at or after the anchor end
                at = rng.randrange(a.end, len(ws.get_document(doc.id).body) + 1)
                dl = rng.randint(0, len(ws.get_document(doc.id).body) - at)
                ws.edit_document(doc.id, at, dl, "tail" if rng.random() < 0.5 else "")
            assert not th.orphaned
            cur = ws.get_document(doc.id).body
            assert cur[th.anchor.start:th.anchor.end] == snapshot


class TestThreads:
    def test_create_and_replies_in_order(self, ws):
        doc = ws.create_document("t", "once upon a time there was a tale")
        th = ws.create_thread(doc.id, 0, 9, "overview")
        for i in range(4):
            ws.append_reply(th.id, f"char{i}", f"idea {i}")
        assert [r.body for r in th.replies] == [f"idea {i}" for i in range(4)]

    def test_invalid_anchor(self, ws):
        doc = ws.create_document("t", "short")
        with pytest.raises(errors.InvalidAnchor):
            ws.create_thread(doc.id, 2, 99, "o")
        with pytest.raises(errors.InvalidAnchor):
            ws.create_thread(doc.id, 3, 3, "o")

    def test_reply_to_unknown_thread(self, ws):
        with pytest.raises(errors.NotFound):
            ws.append_reply("th-404", "a", "b")

    def test_concurrent_appends_lose_nothing(self, ws):
        doc = ws.create_document("t", "0123456789")
        th = ws.create_thread(doc.id, 0, 5, "o")
        n = 100
        barrier = threading.Barrier(n)

        def worker(i):
            barrier.wait()
            ws.append_reply(th.id, f"w{i}", f"idea {i}")

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(n)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(th.replies) == n
        assert {r.body for r in th.replies} == {f"idea {i}" for i in range(n)}


class TestWordCount:
    @pytest.mark.parametrize("text,expected", [
        ("", 0),
        ("Detective Opal considered her seargant.", 5),
        ("a  b\n c", 3),
        ("   ", 0),
        ("one", 1),
        ("tab\tsep\r\nmix", 3),
    ])
    def test_examples(self, text, expected):
        assert word_count(text) == expected

    @given(st.text(alphabet=st.sampled_from("ab \t\n\r"), max_size=80))
    def test_whitespace_invariances(self, text):
        assert word_count(text) == word_count(f"  {text}\n\t")
        import re
        collapsed = re.sub(r"[ \t\n\r]+", " ", text)
        assert word_count(text) == word_count(collapsed)
