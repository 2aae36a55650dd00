import json
import os

import numpy as np
import pytest

from fpgm.cli import main
from fpgm.io_formats import (
    load_image,
    load_prior,
    save_image,
    write_float_grid,
)
from fpgm.prior import edge_signature
from synthetic import texture_dataset


@pytest.fixture
def dataset_dirs(tmp_path):
    imgs = tmp_path / "imgs"
    masks = tmp_path / "masks"
    imgs.mkdir()
    masks.mkdir()
    data = texture_dataset(6, 32, seed=0)
    for i, (img, mask) in enumerate(data):
        save_image(img, str(imgs / f"s{i:02d}.png"))
        save_image(mask.astype(float), str(masks / f"s{i:02d}.png"))
    return str(imgs), str(masks), tmp_path


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def tree_bytes(root):
    out = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            p = os.path.join(dirpath, name)
            out[os.path.relpath(p, root)] = read_bytes(p)
    return out


class TestLearnPrior:
    def test_single_pair_equals_signature(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        out = str(tmp / "prior.json")
        assert main(["learn-prior", "--images", imgs, "--masks", masks,
                     "--out", out, "--mode", "mean"]) == 0
        prior = load_prior(out)
        assert prior.samples_seen == 6
        # cross-module equality: mean-mode prior equals the mean signature
        sigs = [
            edge_signature(load_image(os.path.join(imgs, f)),
                           (load_image(os.path.join(masks, f)) >= 0.5).astype(np.uint8))
            for f in sorted(os.listdir(imgs))
        ]
        assert np.abs(prior.profile - np.mean(sigs, axis=0)).max() < 1e-9

    def test_rerun_byte_identical(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        p1, p2 = str(tmp / "p1.json"), str(tmp / "p2.json")
        for out in (p1, p2):
            assert main(["learn-prior", "--images", imgs, "--masks", masks,
                         "--out", out]) == 0
        assert read_bytes(p1) == read_bytes(p2)

    def test_no_usable_samples_exit_code(self, tmp_path):
        imgs = tmp_path / "i"
        masks = tmp_path / "m"
        imgs.mkdir()
        masks.mkdir()
        save_image(np.ones((8, 8)), str(imgs / "a.png"))
        save_image(np.zeros((8, 8)), str(masks / "a.png"))
        assert main(["learn-prior", "--images", str(imgs), "--masks", str(masks),
                     "--out", str(tmp_path / "p.json")]) == 1


class TestAugment:
    def test_gamma_zero_annulus_gain_outputs_inputs(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        prior_path = str(tmp / "prior.json")
        main(["learn-prior", "--images", imgs, "--masks", masks, "--out", prior_path])
        out_dir = str(tmp / "aug")
        assert main(["augment", "--images", imgs, "--prior", prior_path,
                     "--out-dir", out_dir, "--gamma", "0", "--mode",
                     "annulus_gain"]) == 0
        for name in sorted(os.listdir(imgs)):
            original = read_bytes(os.path.join(imgs, name))
            augmented = read_bytes(os.path.join(out_dir, name))
            assert original == augmented

    def test_sidecar_records(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        prior_path = str(tmp / "prior.json")
        main(["learn-prior", "--images", imgs, "--masks", masks, "--out", prior_path])
        out_dir = str(tmp / "aug2")
        main(["augment", "--images", imgs, "--prior", prior_path, "--out-dir", out_dir])
        lines = open(os.path.join(out_dir, "augment_sidecar.jsonl")).read().splitlines()
        assert len(lines) == 6
        rec = json.loads(lines[0])
        assert rec["gamma"] == 0.05  # library default when flag omitted
        assert rec["mode"] == "radial_broadcast"
        assert len(rec["energy"]) == 1

    def test_missing_prior_is_config_error(self, dataset_dirs):
        imgs, _, tmp = dataset_dirs
        assert main(["augment", "--images", imgs, "--prior",
                     str(tmp / "nope.json"), "--out-dir", str(tmp / "o")]) == 2


class TestSignatureAndSpecificity:
    def test_signature_csv_and_plot(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        out = str(tmp / "sig")
        assert main(["signature", "--images", imgs, "--masks", masks,
                     "--out", out, "--plot"]) == 0
        lines = open(out + "_dataset.csv").read().splitlines()
        assert lines[0] == "radius,mean,std"
        assert len(lines) > 10
        assert os.path.exists(out + ".png")

    def test_signature_subsets(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        out = str(tmp / "split")
        assert main(["signature", "--images", imgs, "--masks", masks,
                     "--out", out, "--subsets", "--seed", "3"]) == 0
        assert os.path.exists(out + "_subset_a.csv")
        assert os.path.exists(out + "_subset_b.csv")

    def test_specificity_outputs(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        out = str(tmp / "spec")
        assert main(["specificity", "--images", imgs, "--masks", masks,
                     "--out", out, "--n-images", "6"]) == 0
        assert os.path.exists(out + "_edge.csv")
        assert os.path.exists(out + "_background.csv")


class TestMetricsCommand:
    def test_identical_dirs_all_100(self, dataset_dirs):
        _, masks, tmp = dataset_dirs
        out = str(tmp / "metrics.csv")
        assert main(["metrics", "--pred", masks, "--gt", masks, "--out", out]) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == "id,dice,jaccard,hd95,asd,status"
        for line in lines[1:-1]:
            _, dice, jaccard, hd95, asd, status = line.split(",")
            assert dice == "100.00" and jaccard == "100.00"
            assert hd95 == "0.00" and asd == "0.00" and status == "ok"
        assert lines[-1].startswith("aggregate,100.00,100.00,0.00,0.00,n=")


class TestLossCommand:
    def test_loss_report(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        raw = rng.random((8, 8, 2))
        probs = raw / raw.sum(axis=2, keepdims=True)
        grid = str(tmp_path / "probs.bin")
        write_float_grid(grid, probs)
        mask_path = str(tmp_path / "mask.png")
        save_image((rng.random((8, 8)) > 0.5).astype(float), mask_path)
        out = str(tmp_path / "loss.json")
        assert main(["loss", "--probs", grid, "--mask", mask_path, "--out", out]) == 0
        report = json.load(open(out))
        assert report["sup"] == pytest.approx(0.5 * (report["ce"] + report["dice"]))
        assert report["total"] == pytest.approx(report["sup"])
        assert report["weights"]["tau_c"] == 0.95

    def test_loss_with_consistency_views(self, tmp_path):
        rng = np.random.default_rng(1)

        def grid(name, arr):
            path = str(tmp_path / name)
            write_float_grid(path, arr)
            return path

        raw = rng.random((8, 8, 2))
        probs = grid("p.bin", raw / raw.sum(axis=2, keepdims=True))
        confident = np.zeros((8, 8, 2))
        confident[:, :, 1] = 0.99
        confident[:, :, 0] = 0.01
        weak = grid("w.bin", confident)
        strong = grid("s.bin", confident)
        mask_path = str(tmp_path / "m.png")
        save_image(np.ones((8, 8)), mask_path)
        out = str(tmp_path / "loss.json")
        assert main(["loss", "--probs", probs, "--mask", mask_path,
                     "--weak-probs", weak, "--strong-probs", strong,
                     "--out", out]) == 0
        report = json.load(open(out))
        assert report["pseudo_valid_fraction"] == 1.0
        assert report["total"] == pytest.approx(report["sup"] + 0.5 * report["unsup"])


class TestConfigAndDeterminism:
    def test_config_file_layering(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        cfg = str(tmp / "cfg.json")
        with open(cfg, "w") as fh:
            json.dump({"momentum": 0.5, "mode": "mean"}, fh)
        out = str(tmp / "p.json")
        # flag overrides config; config overrides default
        assert main(["learn-prior", "--images", imgs, "--masks", masks,
                     "--out", out, "--config", cfg, "--momentum", "0.25"]) == 0
        meta = json.load(open(out + ".meta.json"))
        assert meta["momentum"] == 0.25
        assert meta["mode"] == "mean"
        prior = load_prior(out)
        assert prior.aggregation_mode == "mean"

    def test_every_command_rerun_byte_identical(self, dataset_dirs):
        imgs, masks, tmp = dataset_dirs
        prior_path = str(tmp / "prior.json")
        runs = []
        for tag in ("r1", "r2"):
            root = tmp / tag
            root.mkdir()
            main(["learn-prior", "--images", imgs, "--masks", masks,
                  "--out", str(root / "prior.json")])
            main(["augment", "--images", imgs, "--prior", str(root / "prior.json"),
                  "--out-dir", str(root / "aug"), "--seed", "1"])
            main(["signature", "--images", imgs, "--masks", masks,
                  "--out", str(root / "sig"), "--subsets", "--seed", "1"])
            main(["specificity", "--images", imgs, "--masks", masks,
                  "--out", str(root / "spc"), "--n-images", "6", "--seed", "1"])
            main(["metrics", "--pred", masks, "--gt", masks,
                  "--out", str(root / "metrics.csv")])
            runs.append(tree_bytes(str(root)))
        assert runs[0] == runs[1]
        del prior_path

    def test_help_lists_defaults(self, capsys):
        for cmd, needles in [
            ("augment", ["0.05"]),
            ("learn-prior", ["0.999"]),
            ("loss", ["0.95", "0.5"]),
            ("specificity", ["500"]),
        ]:
            with pytest.raises(SystemExit):
                main([cmd, "--help"])
            text = capsys.readouterr().out
            for needle in needles:
                assert needle in text
